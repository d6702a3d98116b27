//! Shot-noise-limited magnetic sensitivity over light power and Rabi
//! frequency, built from the surrogate width, contrast and a(P) models and
//! the photon budget of the reference setup.

use odmr::numeric::log_space;
use odmr::sensitivity::{photon_rate, sensitivity_map, PhotonBudget, SensitivityModel};

fn main() -> odmr::Result<()> {
    let budget = PhotonBudget::default();
    println!("photon rate at 1 mW: {:.3e} /s", photon_rate(&budget, 1.0)?);

    let model = SensitivityModel::reference();
    let map = sensitivity_map(&model, &log_space(0.02, 500.0, 25), &log_space(0.05, 2.0, 20))?;
    print!("{}", map.summary_text());

    let boosted = SensitivityModel {
        rate_boost: 100.0,
        ..model
    };
    let (_, _, best) = sensitivity_map(&boosted, &map.powers, &map.rabis)?
        .best()
        .expect("finite cell");
    println!("with 100x collection: {:.3} nT/√Hz", best * 1e9);
    Ok(())
}
