//! Calibrate f_R = k·√P_MW from a handful of Rabi measurements, then convert
//! between microwave power and Rabi frequency.

use odmr::io::fit_rabi_calibration;

fn main() -> odmr::Result<()> {
    // Measured Rabi frequencies with a slight amplifier compression.
    let records: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
        .iter()
        .map(|&p: &f64| (p, 0.25 * p.sqrt() * (1.0 - 0.002 * p)))
        .collect();
    let cal = fit_rabi_calibration(&records)?;
    println!("k = {:.5} MHz/√mW", cal.k_rabi);
    println!(
        "rms residual {:.3e} MHz, worst {:.2}%",
        cal.residual_rms,
        100.0 * cal.max_rel_residual
    );
    if let Some(lin) = cal.linear_term {
        println!("linear-in-P term of a quadratic fit: {lin:+.3e}");
    }
    for f in [0.1, 0.5, 1.0] {
        println!("f_R = {f} MHz needs P = {:.3}", cal.power_for(f));
    }
    Ok(())
}
