use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rabi-frequency dependence used inside the NV–P1 term of the width model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P1RateForm {
    /// a·f_R²/(1+f_R²/f0²), consistent with the spin-flip rate formula.
    #[default]
    Squared,
    /// a·f_R/(1+f_R²/f0²), as printed in the global width formula.
    Linear,
}

impl P1RateForm {
    /// u(f), u'(f), u''(f) and ∂u/∂f0 for u = f^e/(1+f²/f0²).
    fn profile(self, f: f64, f0: f64) -> [f64; 4] {
        let s = f0 * f0 + f * f;
        let f02 = f0 * f0;
        match self {
            Self::Squared => [
                f * f * f02 / s,
                2.0 * f * f02 * f02 / (s * s),
                2.0 * f02 * f02 * (f02 - 3.0 * f * f) / (s * s * s),
                2.0 * f * f * f * f * f0 / (s * s),
            ],
            Self::Linear => [
                f * f02 / s,
                f02 * (f02 - f * f) / (s * s),
                -2.0 * f * f02 * (3.0 * f02 - f * f) / (s * s * s),
                2.0 * f * f * f * f0 / (s * s),
            ],
        }
    }
}

/// Parameters of the global width model. Rates are expressed relative to γ2,
/// which cancels from the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthModelParams {
    pub dnu_inh_hz: f64,
    /// γ1^intr/γ2^intr.
    pub ratio_g1_g2: f64,
    /// a(P)/γ2, one entry per light power (1/MHz²).
    pub a_over_g2: Vec<f64>,
    /// c/γ2 (1/mW).
    pub c_over_g2: f64,
    pub p0_mw: f64,
    pub f0_hz: f64,
    #[serde(default)]
    pub p1_form: P1RateForm,
}

impl WidthModelParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("dnu_inh_hz", self.dnu_inh_hz, true),
            ("ratio_g1_g2", self.ratio_g1_g2, false),
            ("c_over_g2", self.c_over_g2, true),
            ("p0_mw", self.p0_mw, false),
            ("f0_hz", self.f0_hz, false),
        ];
        for (name, v, zero_ok) in checks {
            let ok = v.is_finite() && if zero_ok { v >= 0.0 } else { v > 0.0 };
            if !ok {
                return Err(Error::invalid(name, format!("invalid value {v}")));
            }
        }
        if self.a_over_g2.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::invalid("a_over_g2", "entries must be finite and >= 0"));
        }
        Ok(())
    }

    fn a_at(&self, idx: usize) -> Result<f64> {
        self.a_over_g2.get(idx).copied().ok_or_else(|| {
            Error::invalid(
                "power_index",
                format!("{idx} out of range for {} a(P) entries", self.a_over_g2.len()),
            )
        })
    }
}

/// Partial derivatives of the total width with respect to the model
/// parameters, in the order of [`WidthModelParams`] fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthGradient {
    pub dnu_inh: f64,
    pub ratio_g1_g2: f64,
    pub a_over_g2: f64,
    pub c_over_g2: f64,
    pub p0: f64,
    pub f0: f64,
}

/// Total FWHM (MHz) Δν_inh + f_R·sqrt(4(1+P/P0)/(γ1/γ2 + (a/γ2)·u(f_R) + (c/γ2)·P)).
pub fn total_width_model(p: &WidthModelParams, power_mw: f64, power_index: usize, rabi_hz: f64) -> Result<f64> {
    let a = p.a_at(power_index)?;
    let u = p.p1_form.profile(rabi_hz, p.f0_hz)[0];
    let num = 4.0 * (1.0 + power_mw / p.p0_mw);
    let den = p.ratio_g1_g2 + a * u + p.c_over_g2 * power_mw;
    Ok(p.dnu_inh_hz + rabi_hz * (num / den).sqrt())
}

pub fn total_width_gradient(
    p: &WidthModelParams,
    power_mw: f64,
    power_index: usize,
    rabi_hz: f64,
) -> Result<WidthGradient> {
    let a = p.a_at(power_index)?;
    let [u, _, _, du_df0] = p.p1_form.profile(rabi_hz, p.f0_hz);
    let num = 4.0 * (1.0 + power_mw / p.p0_mw);
    let den = p.ratio_g1_g2 + a * u + p.c_over_g2 * power_mw;
    let s = (num / den).sqrt();
    let d_den = -rabi_hz * s / (2.0 * den);
    Ok(WidthGradient {
        dnu_inh: 1.0,
        ratio_g1_g2: d_den,
        a_over_g2: d_den * u,
        c_over_g2: d_den * power_mw,
        p0: rabi_hz * s / (2.0 * num) * (-4.0 * power_mw / (p.p0_mw * p.p0_mw)),
        f0: d_den * a * du_df0,
    })
}

/// Analytic ∂²Δν_tot/∂f_R². Negative values mark the regime where the
/// NV–P1 term makes the width grow sub-linearly.
pub fn total_width_curvature(p: &WidthModelParams, power_mw: f64, power_index: usize, rabi_hz: f64) -> Result<f64> {
    let a = p.a_at(power_index)?;
    let [u, du, d2u, _] = p.p1_form.profile(rabi_hz, p.f0_hz);
    let num = 4.0 * (1.0 + power_mw / p.p0_mw);
    let den = p.ratio_g1_g2 + a * u + p.c_over_g2 * power_mw;
    let (d1, d2) = (a * du, a * d2u);
    let f = rabi_hz;
    let h2 = -den.powf(-1.5) * d1 + 0.75 * f * den.powf(-2.5) * d1 * d1 - 0.5 * f * den.powf(-1.5) * d2;
    Ok(num.sqrt() * h2)
}

/// Width without P1 flips or pumping saturation:
/// Δν_inh + f_R·sqrt(4γ2/(γ1 + Γ_P)).
pub fn approx_total_width(dnu_inh_hz: f64, gamma1: f64, gamma2: f64, pump_rate: f64, rabi_hz: f64) -> f64 {
    dnu_inh_hz + rabi_hz * (4.0 * gamma2 / (gamma1 + pump_rate)).sqrt()
}

/// NV–P1 spin-flip rate γ2·(a/γ2)·f_R²/(1+f_R²/f0²) in 1/µs.
pub fn nv_p1_rate(a_over_g2: f64, gamma2: f64, rabi_hz: f64, f0_hz: f64) -> f64 {
    gamma2 * a_over_g2 * P1RateForm::Squared.profile(rabi_hz, f0_hz)[0]
}

/// Empirical power dependence a(P)/γ2 = a1·P/(1+P/b1) + c1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct APModelParams {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

impl APModelParams {
    pub fn a_of_p(&self, power_mw: f64) -> f64 {
        self.a1 * power_mw / (1.0 + power_mw / self.b1) + self.c1
    }

    /// Gradient with respect to (a1, b1, c1).
    pub fn gradient(&self, power_mw: f64) -> [f64; 3] {
        let d = 1.0 + power_mw / self.b1;
        [
            power_mw / d,
            self.a1 * power_mw * power_mw / (self.b1 * self.b1 * d * d),
            1.0,
        ]
    }

    pub fn saturated(&self) -> f64 {
        self.a1 * self.b1 + self.c1
    }
}

pub fn a_of_p(params: &APModelParams, power_mw: f64) -> f64 {
    params.a_of_p(power_mw)
}
