use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::numeric::integrate_with_breaks;
use crate::spin::LineshapeSummary;

/// FWHM/σ of a Gaussian, 2·sqrt(2 ln 2).
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistKind {
    Lorentzian,
    Gaussian,
}

/// Distribution of resonance frequencies across the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousDist {
    pub kind: DistKind,
    pub fwhm_inh_hz: f64,
    pub center_hz: f64,
}

impl InhomogeneousDist {
    pub fn lorentzian(fwhm: f64, center: f64) -> Self {
        Self {
            kind: DistKind::Lorentzian,
            fwhm_inh_hz: fwhm,
            center_hz: center,
        }
    }

    pub fn gaussian(fwhm: f64, center: f64) -> Self {
        Self {
            kind: DistKind::Gaussian,
            fwhm_inh_hz: fwhm,
            center_hz: center,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm_inh_hz / GAUSSIAN_FWHM_PER_SIGMA
    }

    /// Probability density at ν0 (per MHz).
    pub fn density(&self, nu0: f64) -> f64 {
        let x = nu0 - self.center_hz;
        match self.kind {
            DistKind::Lorentzian => {
                let w = 0.5 * self.fwhm_inh_hz;
                w / std::f64::consts::PI / (x * x + w * w)
            }
            DistKind::Gaussian => {
                let s = self.sigma();
                (-0.5 * x * x / (s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }
}

/// ∫ P(ν0) L(ν − ν0) dν0 with L the peak-normalised homogeneous Lorentzian of
/// half width `hw`.
fn ensemble_depth(dist: &InhomogeneousDist, hw: f64, nu: f64) -> f64 {
    let lor = |x: f64| hw * hw / (x * x + hw * hw);
    let offsets = [0.0, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0, 30.0, -30.0, 100.0, -100.0];
    match dist.kind {
        DistKind::Lorentzian => {
            // ν0 = c + w·tan φ maps the whole line onto (−π/2, π/2) with
            // P(ν0) dν0 = dφ/π, so the heavy tails are covered exactly.
            let w = 0.5 * dist.fwhm_inh_hz;
            let c = dist.center_hz;
            let half_pi = std::f64::consts::FRAC_PI_2;
            let f = |phi: f64| lor(nu - c - w * phi.tan()) / std::f64::consts::PI;
            let breaks: Vec<f64> = offsets
                .iter()
                .map(|k| ((nu + k * hw - c) / w).atan())
                .chain([0.0, 1.0f64.atan(), -(1.0f64.atan())])
                .collect();
            integrate_with_breaks(&f, -half_pi, half_pi, &breaks, QUAD_TOL)
        }
        DistKind::Gaussian => {
            let c = dist.center_hz;
            let s = dist.sigma();
            let half = 50.0 * dist.fwhm_inh_hz;
            let f = |nu0: f64| dist.density(nu0) * lor(nu - nu0);
            let breaks: Vec<f64> = offsets
                .iter()
                .map(|k| nu + k * hw)
                .chain(
                    [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0]
                        .iter()
                        .map(|k| c + k * s),
                )
                .collect();
            integrate_with_breaks(&f, c - half, c + half, &breaks, QUAD_TOL)
        }
    }
}

/// Ensemble-averaged signal at frequency `nu` for a homogeneous resonance
/// described by `homogeneous`.
pub fn ensemble_signal_at(dist: &InhomogeneousDist, homogeneous: &LineshapeSummary, nu: f64) -> f64 {
    let hw = 0.5 * homogeneous.fwhm_hz;
    homogeneous.baseline * (1.0 - homogeneous.contrast * ensemble_depth(dist, hw, nu))
}

/// Samples the ensemble-averaged signal on `grid` (MHz, strictly increasing).
///
/// The grid must span at least 20 times the summed widths and resolve the
/// broader of the two components with at least 20 points per FWHM.
pub fn convolve_inhomogeneous(
    dist: &InhomogeneousDist,
    homogeneous: &LineshapeSummary,
    grid: &[f64],
) -> Result<Vec<f64>> {
    ensure_positive("fwhm_inh_hz", dist.fwhm_inh_hz)?;
    ensure_positive("fwhm_hz", homogeneous.fwhm_hz)?;
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse("need at least 3 grid points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridTooCoarse("grid must be strictly increasing".into()));
    }
    let combined = dist.fwhm_inh_hz + homogeneous.fwhm_hz;
    let span = grid[grid.len() - 1] - grid[0];
    if span < 20.0 * combined {
        return Err(Error::GridTooCoarse(format!(
            "span {span} MHz is less than 20 combined FWHM ({} MHz)",
            20.0 * combined
        )));
    }
    let widest = dist.fwhm_inh_hz.max(homogeneous.fwhm_hz);
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if step > widest / 20.0 {
        return Err(Error::GridTooCoarse(format!(
            "spacing {step} MHz exceeds FWHM/20 = {} MHz",
            widest / 20.0
        )));
    }
    Ok(grid
        .par_iter()
        .map(|&nu| ensemble_signal_at(dist, homogeneous, nu))
        .collect())
}
