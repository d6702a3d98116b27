//! Fitted values for a reference diamond sample, used as defaults and as generator
//! values for synthetic data.

use crate::lineshape::{APModelParams, ContrastModelParams, P1RateForm, WidthModelParams};

/// Inhomogeneous width Δν_inh (MHz).
pub const DNU_INH_MHZ: f64 = 3.08;
/// γ1^intr/γ2^intr.
pub const RATIO_G1_G2: f64 = 0.0014;
/// c/γ2^intr (1/mW).
pub const C_OVER_G2: f64 = 0.018;
/// Pumping saturation power P0 (mW).
pub const P0_MW: f64 = 39.0;
/// NV–P1 saturation Rabi frequency f0 (MHz).
pub const F0_MHZ: f64 = 1.0;

pub const A1: f64 = 0.5;
pub const B1_MW: f64 = 0.5;
pub const C1: f64 = 0.074;

pub const THETA: f64 = 22.9e-3;
/// γ1^intr/c (mW).
pub const G1_OVER_C_MW: f64 = 0.71;
/// γ1^intr·γ2^intr (1/µs²).
pub const G1_G2: f64 = 0.0047;

/// ¹⁴N hyperfine splitting (MHz).
pub const HYPERFINE_SPLITTING_MHZ: f64 = 2.2;
/// Distance of the NV–P1 side resonances from the main line (MHz).
pub const SIDE_RESONANCE_DELTA_MHZ: f64 = 33.0;
/// Width of the scan range excluded around each side resonance (MHz).
pub const SIDE_EXCLUSION_WIDTH_MHZ: f64 = 20.0;
/// Centre frequency of the lowest resonance studied (MHz).
pub const CENTER_MHZ: f64 = 2654.0;

/// Light powers (mW) spanning the measured range, log-spaced.
pub fn light_powers() -> Vec<f64> {
    crate::numeric::log_space(0.02, 500.0, 12)
}

/// Rabi frequencies (MHz) of a typical 8-setting measurement grid.
pub fn rabi_settings() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.34, 0.5, 0.62, 0.85, 1.14]
}

pub fn ap_model() -> APModelParams {
    APModelParams {
        a1: A1,
        b1: B1_MW,
        c1: C1,
    }
}

pub fn contrast_model() -> ContrastModelParams {
    ContrastModelParams {
        theta: THETA,
        g1_over_c_mw: G1_OVER_C_MW,
        g1g2: G1_G2,
    }
}

/// Width-model parameters with a(P) evaluated from the a(P) model at each of
/// `powers`.
pub fn width_model(powers: &[f64]) -> WidthModelParams {
    let ap = ap_model();
    WidthModelParams {
        dnu_inh_hz: DNU_INH_MHZ,
        ratio_g1_g2: RATIO_G1_G2,
        a_over_g2: powers.iter().map(|&p| ap.a_of_p(p)).collect(),
        c_over_g2: C_OVER_G2,
        p0_mw: P0_MW,
        f0_hz: F0_MHZ,
        p1_form: P1RateForm::Squared,
    }
}
