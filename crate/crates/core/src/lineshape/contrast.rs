use serde::{Deserialize, Serialize};

use crate::numeric::golden_max;

const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Parameters of the ensemble contrast model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastModelParams {
    /// Fraction of fluorescence lost from the m_s = ±1 states.
    pub theta: f64,
    /// γ1^intr/c (mW).
    pub g1_over_c_mw: f64,
    /// γ1^intr·γ2^intr (1/µs²).
    pub g1g2: f64,
}

impl ContrastModelParams {
    /// C = θ/4 · P/(P + r(1−θ)) · f_R²/(f_R² + q(1+P/r)/(4π²)), r = γ1/c, q = γ1γ2.
    pub fn eval(&self, power_mw: f64, rabi_hz: f64) -> f64 {
        let (x, y) = self.factors(power_mw, rabi_hz);
        0.25 * self.theta * x * y
    }

    fn factors(&self, p: f64, f: f64) -> (f64, f64) {
        let r = self.g1_over_c_mw;
        let x = p / (p + r * (1.0 - self.theta));
        let y = f * f / (f * f + self.g1g2 * (1.0 + p / r) / FOUR_PI2);
        (x, y)
    }

    /// Gradient with respect to (θ, γ1/c, γ1γ2).
    pub fn gradient(&self, p: f64, f: f64) -> [f64; 3] {
        let (theta, r, q) = (self.theta, self.g1_over_c_mw, self.g1g2);
        let (x, y) = self.factors(p, f);
        let xd = p + r * (1.0 - theta);
        let yd = f * f + q * (1.0 + p / r) / FOUR_PI2;
        let dx_dtheta = p * r / (xd * xd);
        let dx_dr = -p * (1.0 - theta) / (xd * xd);
        let dy_dr = f * f * q * p / (FOUR_PI2 * r * r * yd * yd);
        let dy_dq = -f * f * (1.0 + p / r) / (FOUR_PI2 * yd * yd);
        [
            0.25 * (x * y + theta * y * dx_dtheta),
            0.25 * theta * (dx_dr * y + x * dy_dr),
            0.25 * theta * x * dy_dq,
        ]
    }
}

pub fn contrast_model(params: &ContrastModelParams, power_mw: f64, rabi_hz: f64) -> f64 {
    params.eval(power_mw, rabi_hz)
}

/// Light power (mW) in [lo, hi] maximising the contrast at `rabi_hz`, with
/// the maximum value. Searches in log P.
pub fn contrast_argmax_power(params: &ContrastModelParams, rabi_hz: f64, lo_mw: f64, hi_mw: f64) -> (f64, f64) {
    let (lp, c) = golden_max(|lp| params.eval(lp.exp(), rabi_hz), lo_mw.ln(), hi_mw.ln(), 1e-10);
    (lp.exp(), c)
}
