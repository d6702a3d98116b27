//! Synthesise a noisy hyperfine triplet with NV–P1 side dips, then fit it
//! with the side-resonance windows excluded and print the report.

use odmr::fitting::{fit_spectrum, ExclusionConfig};
use odmr::io::{fit_report_to_text, synth_spectrum, SideResonance, MACHINE_MARKER};
use odmr::lineshape::HyperfineModel;
use odmr::presets;

fn main() -> odmr::Result<()> {
    let truth = HyperfineModel::new(5e-3, presets::CENTER_MHZ, 2.0);
    let side = SideResonance {
        delta_mhz: 33.0,
        contrast: 2e-3,
        hwhm_mhz: 1.0,
    };
    let spec = synth_spectrum(&truth, Some(side), 5e-4, 1, None)?;
    println!(
        "{} points from {:.1} to {:.1} MHz",
        spec.len(),
        spec.freq_mhz[0],
        spec.freq_mhz[spec.len() - 1]
    );

    let report = fit_spectrum(&spec, presets::HYPERFINE_SPLITTING_MHZ, &ExclusionConfig::default())?;
    let text = fit_report_to_text(&report);
    // The JSON block after the marker is for machines.
    print!("{}", text.split(MACHINE_MARKER).next().unwrap_or(&text));
    for (name, t) in [
        ("amplitude", truth.amplitude),
        ("nu0_mhz", truth.center_hz),
        ("g_mhz", truth.hwhm_hz),
    ] {
        println!("pull {name}: {:+.2}", report.pull(name, t).unwrap_or(f64::NAN));
    }
    Ok(())
}
