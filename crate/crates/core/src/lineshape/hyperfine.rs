use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three equal Lorentzian dips split by the ¹⁴N hyperfine interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineModel {
    /// Peak height A of each component.
    pub amplitude: f64,
    /// Central frequency ν0 (MHz).
    pub center_hz: f64,
    /// Half width g of each component (MHz); the FWHM is 2g.
    pub hwhm_hz: f64,
    /// Splitting A_hf (MHz).
    pub splitting_hz: f64,
}

impl HyperfineModel {
    pub fn new(amplitude: f64, center_hz: f64, hwhm_hz: f64) -> Self {
        Self {
            amplitude,
            center_hz,
            hwhm_hz,
            splitting_hz: crate::presets::HYPERFINE_SPLITTING_MHZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0 / 3.0) {
            return Err(Error::invalid(
                "amplitude",
                format!("must lie in (0, 1/3], got {}", self.amplitude),
            ));
        }
        if !(self.hwhm_hz > 0.0 && self.hwhm_hz.is_finite()) {
            return Err(Error::invalid("hwhm_hz", "must be > 0"));
        }
        if !(self.splitting_hz >= 0.0) || !self.center_hz.is_finite() {
            return Err(Error::invalid("splitting_hz", "must be >= 0 with a finite centre"));
        }
        Ok(())
    }

    /// S(ν) = 1 − Σ_m A g²/((ν − ν0 − m·A_hf)² + g²), m ∈ {−1, 0, 1}.
    pub fn eval(&self, nu: f64) -> f64 {
        let g2 = self.hwhm_hz * self.hwhm_hz;
        let dip: f64 = (-1..=1)
            .map(|m| {
                let x = nu - self.center_hz - m as f64 * self.splitting_hz;
                g2 / (x * x + g2)
            })
            .sum();
        1.0 - self.amplitude * dip
    }

    /// Partial derivatives of S(ν) with respect to (A, ν0, g).
    pub fn gradient(&self, nu: f64) -> [f64; 3] {
        let g = self.hwhm_hz;
        let g2 = g * g;
        let mut out = [0.0; 3];
        for m in -1..=1 {
            let x = nu - self.center_hz - m as f64 * self.splitting_hz;
            let den = x * x + g2;
            out[0] -= g2 / den;
            out[1] -= self.amplitude * g2 * 2.0 * x / (den * den);
            out[2] -= self.amplitude * 2.0 * g * x * x / (den * den);
        }
        out
    }

    /// On-resonance depth C = A·[1 + 2g²/(A_hf² + g²)].
    pub fn contrast(&self) -> f64 {
        self.amplitude * Self::contrast_factor(self.hwhm_hz, self.splitting_hz)
    }

    /// C/A for components of half width `g` split by `ahf`; tends to 3 when
    /// g ≫ A_hf.
    pub fn contrast_factor(g: f64, ahf: f64) -> f64 {
        1.0 + 2.0 * g * g / (ahf * ahf + g * g)
    }

    /// Scan half-range that the model needs to reach its baseline.
    pub fn required_half_span(&self) -> f64 {
        (10.0 * self.hwhm_hz).max(5.0 * self.splitting_hz)
    }

    /// FWHM of the whole triplet (not of a single component), found by
    /// bisection on the summed profile.
    pub fn total_fwhm(&self) -> f64 {
        let depth = 1.0 - self.eval(self.center_hz);
        let target = 1.0 - 0.5 * depth;
        let mut lo = 0.0;
        let mut hi = self.splitting_hz + 10.0 * self.hwhm_hz;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(self.center_hz + mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo + hi
    }
}

/// Samples the hyperfine triplet on `grid`.
pub fn triple_lorentzian(model: &HyperfineModel, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&nu| model.eval(nu)).collect()
}
