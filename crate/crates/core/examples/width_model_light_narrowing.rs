//! Light narrowing in the global width model: at fixed Rabi frequency the
//! ensemble line gets narrower as the pumping light gets stronger, and the
//! NV–P1 term bends the width-vs-f_R curve downwards at low power.

use odmr::lineshape::{total_width_curvature, total_width_model};
use odmr::numeric::log_space;
use odmr::presets;

fn main() -> odmr::Result<()> {
    let powers = log_space(0.02, 500.0, 7);
    let model = presets::width_model(&powers);
    for rabi in [0.2, 0.5, 1.1] {
        let w: Vec<f64> = (0..powers.len())
            .map(|i| total_width_model(&model, powers[i], i, rabi))
            .collect::<Result<_, _>>()?;
        let row: Vec<String> = w.iter().map(|v| format!("{v:7.3}")).collect();
        println!(
            "f_R {rabi:4} MHz: {}  narrowing x{:.2}",
            row.join(" "),
            w[0] / w[w.len() - 1]
        );
    }

    let mut no_p1 = presets::width_model(&[0.02]);
    let with_p1 = no_p1.clone();
    no_p1.a_over_g2 = vec![0.0];
    println!("curvature at 0.5 MHz, 0.02 mW:");
    println!(
        "  with NV-P1 term    {:+.4e}",
        total_width_curvature(&with_p1, 0.02, 0, 0.5)?
    );
    println!(
        "  without NV-P1 term {:+.4e}",
        total_width_curvature(&no_p1, 0.02, 0, 0.5)?
    );
    Ok(())
}
