use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{angular, Complex64, Level, LineshapeSummary, SteadyState};
use crate::error::{ensure_finite_nonneg, Error, Result};
use crate::numeric::{solve_dense, symmetric_fwhm};

/// Rates and drive of the optically pumped two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    /// Longitudinal relaxation rate γ1 (1/µs).
    pub gamma1: f64,
    /// Transverse relaxation rate γ2 (1/µs).
    pub gamma2: f64,
    /// Optical pumping rate Γ_P into |0⟩ (1/µs).
    pub pump_rate: f64,
    /// Rabi frequency f_R (MHz).
    pub rabi_hz: f64,
    /// Microwave detuning ν−ν0 (MHz).
    pub detuning_hz: f64,
    /// Readout asymmetry θ = (α−β)/(2α).
    pub theta: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        Self {
            gamma1: 0.001,
            gamma2: 1.0,
            pump_rate: 0.1,
            rabi_hz: 1.0,
            detuning_hz: 0.0,
            theta: crate::presets::THETA,
        }
    }
}

impl TwoLevelParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite_nonneg("gamma1", self.gamma1)?;
        ensure_finite_nonneg("gamma2", self.gamma2)?;
        ensure_finite_nonneg("pump_rate", self.pump_rate)?;
        ensure_finite_nonneg("rabi_hz", self.rabi_hz)?;
        if !self.detuning_hz.is_finite() {
            return Err(Error::invalid("detuning_hz", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(
                "theta",
                format!("must lie in [0, 1], got {}", self.theta),
            ));
        }
        if self.gamma2 < 0.5 * self.gamma1 {
            return Err(Error::invalid(
                "gamma2",
                format!(
                    "T2 <= 2 T1 requires gamma2 >= gamma1/2 ({} < {})",
                    self.gamma2,
                    0.5 * self.gamma1
                ),
            ));
        }
        Ok(())
    }

    /// γ2^eff = γ2 + Γ_P/2.
    pub fn gamma2_eff(&self) -> f64 {
        self.gamma2 + 0.5 * self.pump_rate
    }

    pub fn with_detuning(mut self, d: f64) -> Self {
        self.detuning_hz = d;
        self
    }

    pub fn with_rabi(mut self, f: f64) -> Self {
        self.rabi_hz = f;
        self
    }

    /// Readout weights (α, β) with α normalised to 1.
    fn readout(&self) -> (f64, f64) {
        (1.0, 1.0 - 2.0 * self.theta)
    }
}

/// Right-hand sides of the two-level Bloch equations, in the order
/// (ρ̇00, ρ̇11, ρ̇01, ρ̇10).
pub fn two_level_derivatives(p: &TwoLevelParams, s: &SteadyState) -> [Complex64; 4] {
    let i = Complex64::i();
    let om = angular(p.rabi_hz);
    let d = angular(p.detuning_hz);
    let g2 = p.gamma2_eff();
    let r00 = Complex64::from(s.rho(Level::Ground0));
    let r11 = Complex64::from(s.rho(Level::Ground1));
    let r01 = s.coherence01;
    let r10 = s.coherence10();
    [
        -i * om / 2.0 * (r01 - r10) - p.gamma1 / 2.0 * (r00 - r11) + p.pump_rate * r11,
        i * om / 2.0 * (r01 - r10) - p.gamma1 / 2.0 * (r11 - r00) - p.pump_rate * r11,
        -(g2 - i * d) * r01 + i * om / 2.0 * (r11 - r00),
        -(g2 + i * d) * r10 - i * om / 2.0 * (r11 - r00),
    ]
}

/// Steady state of the two-level Bloch equations.
///
/// Unknowns are (ρ00, ρ11, Re ρ01, Im ρ01); the ρ̇00 row is replaced by the
/// trace condition.
pub fn two_level_steady_state(p: &TwoLevelParams) -> Result<SteadyState> {
    p.validate()?;
    let om = angular(p.rabi_hz);
    let d = angular(p.detuning_hz);
    let g2 = p.gamma2_eff();
    let g1 = p.gamma1;
    let gp = p.pump_rate;

    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        1.0,       1.0,             0.0,  0.0,
        g1 / 2.0,  -g1 / 2.0 - gp,  0.0,  -om,
        0.0,       0.0,             -g2,  -d,
        -om / 2.0, om / 2.0,        d,    -g2,
    ]);
    let b = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let x = solve_dense(a, b)?;
    Ok(SteadyState {
        populations: vec![(Level::Ground0, x[0]), (Level::Ground1, x[1])],
        coherence01: Complex64::new(x[2], x[3]),
    })
}

/// ODMR signal αρ00 + βρ11 (α = 1).
pub fn two_level_signal(p: &TwoLevelParams) -> Result<f64> {
    let s = two_level_steady_state(p)?;
    let (alpha, beta) = p.readout();
    Ok(alpha * s.rho(Level::Ground0) + beta * s.rho(Level::Ground1))
}

/// Off-resonant signal S(∞), i.e. the signal with the drive removed.
pub fn two_level_baseline(p: &TwoLevelParams) -> Result<f64> {
    two_level_signal(&p.with_rabi(0.0).with_detuning(0.0))
}

/// Closed-form FWHM (MHz) of the two-level resonance:
/// Δν = sqrt((γ2eff/π)² + 4γ2eff/(γ1+Γ_P)·f_R²).
pub fn two_level_width(p: &TwoLevelParams) -> Result<f64> {
    p.validate()?;
    let g2 = p.gamma2_eff();
    if g2 <= 0.0 {
        return Err(Error::DegenerateSystem("gamma2_eff = 0: no transverse damping".into()));
    }
    let t1 = p.gamma1 + p.pump_rate;
    let f2 = p.rabi_hz * p.rabi_hz;
    let broadening = if f2 == 0.0 {
        0.0
    } else if t1 == 0.0 {
        return Err(Error::DegenerateSystem(
            "gamma1 + pump_rate = 0 with nonzero drive".into(),
        ));
    } else {
        4.0 * g2 / t1 * f2
    };
    Ok(((g2 / std::f64::consts::PI).powi(2) + broadening).sqrt())
}

/// Closed-form single-center contrast
/// C = θ·Γ_P/(Γ_P+γ1(1−θ)) · Ω²/(Ω²+γ2eff(γ1+Γ_P)).
pub fn two_level_contrast(p: &TwoLevelParams) -> Result<f64> {
    p.validate()?;
    Ok(contrast_with_dephasing(p, p.gamma2_eff()))
}

/// Ensemble contrast: one quarter of the centers are resonant and the optical
/// contribution to dephasing is neglected (γ2eff ≈ γ2). With Γ_P = cP this is
/// the rearranged form used for global contrast fits.
pub fn two_level_ensemble_contrast(p: &TwoLevelParams) -> Result<f64> {
    p.validate()?;
    Ok(0.25 * contrast_with_dephasing(p, p.gamma2))
}

fn contrast_with_dephasing(p: &TwoLevelParams, g2: f64) -> f64 {
    let gp = p.pump_rate;
    if gp == 0.0 {
        return 0.0;
    }
    let om2 = angular(p.rabi_hz).powi(2);
    let pol = gp / (gp + p.gamma1 * (1.0 - p.theta));
    let drive = om2 / (om2 + g2 * (p.gamma1 + gp));
    p.theta * pol * drive
}

/// Analytic summary of the resonance (contrast, FWHM, baseline).
pub fn two_level_summary(p: &TwoLevelParams) -> Result<LineshapeSummary> {
    Ok(LineshapeSummary {
        contrast: two_level_contrast(p)?,
        fwhm_hz: two_level_width(p)?,
        baseline: two_level_baseline(p)?,
    })
}

/// FWHM extracted from the exact steady-state signal by half-depth bisection.
pub fn two_level_numeric_fwhm(p: &TwoLevelParams) -> Result<f64> {
    let base = two_level_baseline(p)?;
    let hint = p.gamma2_eff() / std::f64::consts::PI + p.rabi_hz;
    symmetric_fwhm(|d| two_level_signal(&p.with_detuning(d)), base, hint)
}
