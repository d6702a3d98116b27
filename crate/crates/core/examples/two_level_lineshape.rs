//! Steady-state ODMR dip of the optically pumped two-level system: the
//! closed-form width and contrast next to values read off the exact solution.

use odmr::spin::{two_level_numeric_fwhm, two_level_summary, TwoLevelParams};

fn main() -> odmr::Result<()> {
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12}",
        "pump", "f_R", "fwhm", "numeric", "contrast"
    );
    for pump in [0.01, 0.1, 1.0] {
        for rabi in [0.1, 0.5, 1.0] {
            let p = TwoLevelParams {
                pump_rate: pump,
                rabi_hz: rabi,
                ..TwoLevelParams::default()
            };
            let s = two_level_summary(&p)?;
            let numeric = two_level_numeric_fwhm(&p)?;
            println!(
                "{pump:>8} {rabi:>8} {:>12.6} {numeric:>12.6} {:>12.3e}",
                s.fwhm_hz, s.contrast
            );
        }
    }

    // A short scan around resonance, normalised to the off-resonant level.
    let p = TwoLevelParams {
        pump_rate: 0.1,
        rabi_hz: 0.5,
        ..TwoLevelParams::default()
    };
    let s = two_level_summary(&p)?;
    for d in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
        println!("detuning {d:>5} MHz  signal {:.6}", s.signal(d) / s.baseline);
    }
    Ok(())
}
