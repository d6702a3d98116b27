//! Ensemble averaging of a homogeneous Lorentzian dip over Lorentzian and
//! Gaussian distributions of resonance frequencies. Lorentzian widths add;
//! the Gaussian case gives a Voigt profile.

use odmr::lineshape::{convolve_inhomogeneous, InhomogeneousDist};
use odmr::numeric::{lin_space, sampled_fwhm};
use odmr::spin::LineshapeSummary;

fn main() -> odmr::Result<()> {
    let homogeneous = LineshapeSummary {
        contrast: 0.01,
        fwhm_hz: 1.5,
        baseline: 1.0,
    };
    for inh in [0.5, 3.08, 10.0] {
        let half = 200.0;
        let grid = lin_space(-half, half, 16001);
        for dist in [
            InhomogeneousDist::lorentzian(inh, 0.0),
            InhomogeneousDist::gaussian(inh, 0.0),
        ] {
            let y = convolve_inhomogeneous(&dist, &homogeneous, &grid)?;
            let w = sampled_fwhm(&grid, &y, homogeneous.baseline)?;
            println!("{:?} inhomogeneous fwhm {inh:>5}: ensemble fwhm {w:.4} MHz", dist.kind);
        }
    }

    // Grids that cannot resolve the line are rejected rather than guessed at.
    let coarse = lin_space(-10.0, 10.0, 11);
    let err = convolve_inhomogeneous(&InhomogeneousDist::lorentzian(3.0, 0.0), &homogeneous, &coarse).unwrap_err();
    println!("coarse grid: {err}");
    Ok(())
}
