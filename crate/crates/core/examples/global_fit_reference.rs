//! Generate a 12-power x 8-Rabi grid of widths and amplitudes from the
//! reference parameter set, add 2% / 3% noise, and recover the parameters
//! with the global width, contrast and a(P) fits.

use odmr::fitting::{fit_ap_curve, global_contrast_fit, global_width_fit, GlobalContrastOptions, GlobalWidthOptions};
use odmr::io::{synth_grid, GridNoise};
use odmr::presets;

fn main() -> odmr::Result<()> {
    let powers = presets::light_powers();
    let rabis = presets::rabi_settings();
    let grid = synth_grid(
        &presets::width_model(&powers),
        &presets::contrast_model(),
        &powers,
        &rabis,
        GridNoise::reference(),
        7,
    )?;

    let width = global_width_fit(&grid, &GlobalWidthOptions::default())?;
    let truth = [
        presets::DNU_INH_MHZ,
        presets::RATIO_G1_G2,
        presets::C_OVER_G2,
        presets::P0_MW,
        presets::F0_MHZ,
    ];
    for (name, t) in odmr::fitting::WIDTH_SCALAR_NAMES.iter().zip(truth) {
        let p = width.report.get(name).expect("fitted");
        println!(
            "{name:>12} = {:.5} ± {:.5}  (truth {t}, pull {:+.2})",
            p.value,
            p.ci68,
            (p.value - t) / p.ci68
        );
    }

    let contrast = global_contrast_fit(&grid, &GlobalContrastOptions::default())?;
    let truth = [presets::THETA, presets::G1_OVER_C_MW, presets::G1_G2];
    for (name, t) in odmr::fitting::CONTRAST_NAMES.iter().zip(truth) {
        let p = contrast.report.get(name).expect("fitted");
        println!("{name:>12} = {:.5} ± {:.5}  (truth {t})", p.value, p.ci68);
    }

    let ap = fit_ap_curve(&width.a_values())?;
    println!(
        "a(P)/γ2 = {:.3}·P/(1+P/{:.3}) + {:.4}",
        ap.params.a1, ap.params.b1, ap.params.c1
    );
    for note in width.report.notes.iter().chain(&contrast.report.notes) {
        println!("note: {note}");
    }
    Ok(())
}
