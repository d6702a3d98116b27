//! Five-level model read out through triplet fluorescence and through IR
//! absorption on the singlet. Both give the same centre and width; the
//! approximate width formula is flagged when its assumptions break.

use odmr::spin::{five_level_summary, five_level_width, FiveLevelParams, Readout};

fn main() -> odmr::Result<()> {
    for pump in [0.04, 0.4, 20.0] {
        let p = FiveLevelParams {
            pump_rate_tilde: pump,
            rabi_hz: 0.3,
            ..FiveLevelParams::default()
        };
        let fl = five_level_summary(&p, Readout::Fluorescence)?;
        let ir = five_level_summary(&p, Readout::IrAbsorption)?;
        let approx = five_level_width(&p)?;
        println!(
            "pump {pump:>6}: fluorescence fwhm {:.9} contrast {:.3e}",
            fl.fwhm_hz, fl.contrast
        );
        println!(
            "              ir absorption fwhm {:.9} contrast {:.3e}",
            ir.fwhm_hz, ir.contrast
        );
        println!("              approximate   fwhm {:.9}", approx.fwhm_hz);
        for v in &approx.violations {
            println!("              regime: {v}");
        }
    }
    Ok(())
}
