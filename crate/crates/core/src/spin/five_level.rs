use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{angular, Complex64, Level, LineshapeSummary, SteadyState};
use crate::error::{ensure_finite_nonneg, Error, Result};
use crate::numeric::{solve_dense, symmetric_fwhm};

/// Excited-state decay rate Γ0 = 1/(12 ns), in 1/µs.
pub const DEFAULT_GAMMA0: f64 = 1.0 / 0.012;
/// Singlet feeding rate Γf = 1/(12 ns), in 1/µs.
pub const DEFAULT_GAMMA_F: f64 = 1.0 / 0.012;
/// Singlet decay rate Γs = 1/(200 ns), in 1/µs.
pub const DEFAULT_GAMMA_S: f64 = 1.0 / 0.200;

/// Ratio above which a "much less than" assumption of the approximate width
/// formula is reported as violated.
const REGIME_RATIO: f64 = 0.1;

/// Rates of the five-level model {|0⟩, |1⟩, |e0⟩, |e1⟩, |s⟩}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveLevelParams {
    pub gamma0: f64,
    pub gamma_f: f64,
    pub gamma_s: f64,
    /// Optical excitation rate Γ̃_P (1/µs).
    pub pump_rate_tilde: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub rabi_hz: f64,
    pub detuning_hz: f64,
}

impl Default for FiveLevelParams {
    fn default() -> Self {
        Self {
            gamma0: DEFAULT_GAMMA0,
            gamma_f: DEFAULT_GAMMA_F,
            gamma_s: DEFAULT_GAMMA_S,
            pump_rate_tilde: 0.04,
            gamma1: 0.001,
            gamma2: 1.0,
            rabi_hz: 0.3,
            detuning_hz: 0.0,
        }
    }
}

impl FiveLevelParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite_nonneg("gamma0", self.gamma0)?;
        ensure_finite_nonneg("gamma_f", self.gamma_f)?;
        ensure_finite_nonneg("gamma_s", self.gamma_s)?;
        ensure_finite_nonneg("pump_rate_tilde", self.pump_rate_tilde)?;
        ensure_finite_nonneg("gamma1", self.gamma1)?;
        ensure_finite_nonneg("gamma2", self.gamma2)?;
        ensure_finite_nonneg("rabi_hz", self.rabi_hz)?;
        if !self.detuning_hz.is_finite() {
            return Err(Error::invalid("detuning_hz", "must be finite"));
        }
        Ok(())
    }

    /// γ2^eff = γ2 + Γ̃_P/2.
    pub fn gamma2_eff(&self) -> f64 {
        self.gamma2 + 0.5 * self.pump_rate_tilde
    }

    pub fn with_detuning(mut self, d: f64) -> Self {
        self.detuning_hz = d;
        self
    }

    pub fn with_rabi(mut self, f: f64) -> Self {
        self.rabi_hz = f;
        self
    }

    /// Two-level parameters with the same width in the low-excitation limit:
    /// Γ_P = Γ̃_P/4 and the same effective dephasing rate.
    pub fn equivalent_two_level(&self, theta: f64) -> super::TwoLevelParams {
        let pump = 0.25 * self.pump_rate_tilde;
        super::TwoLevelParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2_eff() - 0.5 * pump,
            pump_rate: pump,
            rabi_hz: self.rabi_hz,
            detuning_hz: self.detuning_hz,
            theta,
        }
    }
}

/// Which observable of the five-level model is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Readout {
    /// Triplet fluorescence ρe0e0 + Γ0/(Γ0+Γf)·ρe1e1.
    Fluorescence,
    /// Singlet absorption ∝ ρss.
    IrAbsorption,
}

/// Right-hand sides of the five-level equations in the order
/// (ρ̇00, ρ̇11, ρ̇01, ρ̇10, ρ̇e0e0, ρ̇e1e1, ρ̇ss).
pub fn five_level_derivatives(p: &FiveLevelParams, s: &SteadyState) -> [Complex64; 7] {
    let i = Complex64::i();
    let om = angular(p.rabi_hz);
    let d = angular(p.detuning_hz);
    let g2 = p.gamma2_eff();
    let gp = p.pump_rate_tilde;
    let c = |l| Complex64::from(s.rho(l));
    let (r00, r11) = (c(Level::Ground0), c(Level::Ground1));
    let (e0, e1, ss) = (c(Level::Excited0), c(Level::Excited1), c(Level::Singlet));
    let r01 = s.coherence01;
    let r10 = s.coherence10();
    [
        -i * om / 2.0 * (r01 - r10) - p.gamma1 / 2.0 * (r00 - r11) - gp * r00 + p.gamma0 * e0 + p.gamma_s / 2.0 * ss,
        i * om / 2.0 * (r01 - r10) - p.gamma1 / 2.0 * (r11 - r00) - gp * r11 + p.gamma0 * e1 + p.gamma_s / 2.0 * ss,
        -(g2 - i * d) * r01 + i * om / 2.0 * (r11 - r00),
        -(g2 + i * d) * r10 - i * om / 2.0 * (r11 - r00),
        gp * r00 - p.gamma0 * e0,
        gp * r11 - (p.gamma0 + p.gamma_f) * e1,
        p.gamma_f * e1 - p.gamma_s * ss,
    ]
}

/// Steady state of the five-level model. Unknowns are
/// (ρ00, ρ11, Re ρ01, Im ρ01, ρe0e0, ρe1e1, ρss); the ρ̇00 row is replaced by
/// the trace condition.
pub fn five_level_steady_state(p: &FiveLevelParams) -> Result<SteadyState> {
    p.validate()?;
    let om = angular(p.rabi_hz);
    let d = angular(p.detuning_hz);
    let g2 = p.gamma2_eff();
    let g1 = p.gamma1;
    let gp = p.pump_rate_tilde;
    let (g0, gf, gs) = (p.gamma0, p.gamma_f, p.gamma_s);

    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(7, 7, &[
        1.0,       1.0,             0.0, 0.0, 1.0, 1.0,        1.0,
        g1 / 2.0,  -g1 / 2.0 - gp,  0.0, -om, 0.0, g0,         gs / 2.0,
        0.0,       0.0,             -g2, -d,  0.0, 0.0,        0.0,
        -om / 2.0, om / 2.0,        d,   -g2, 0.0, 0.0,        0.0,
        gp,        0.0,             0.0, 0.0, -g0, 0.0,        0.0,
        0.0,       gp,              0.0, 0.0, 0.0, -(g0 + gf), 0.0,
        0.0,       0.0,             0.0, 0.0, 0.0, gf,         -gs,
    ]);
    let mut b = DVector::zeros(7);
    b[0] = 1.0;
    let x = solve_dense(a, b)?;
    Ok(SteadyState {
        populations: vec![
            (Level::Ground0, x[0]),
            (Level::Ground1, x[1]),
            (Level::Excited0, x[4]),
            (Level::Excited1, x[5]),
            (Level::Singlet, x[6]),
        ],
        coherence01: Complex64::new(x[2], x[3]),
    })
}

fn readout_value(p: &FiveLevelParams, s: &SteadyState, readout: Readout) -> f64 {
    match readout {
        Readout::Fluorescence => s.rho(Level::Excited0) + p.gamma0 / (p.gamma0 + p.gamma_f) * s.rho(Level::Excited1),
        Readout::IrAbsorption => s.rho(Level::Singlet),
    }
}

/// Steady-state value of either readout.
pub fn five_level_readout(p: &FiveLevelParams, readout: Readout) -> Result<f64> {
    if readout == Readout::Fluorescence && !(p.gamma0 + p.gamma_f > 0.0) {
        return Err(Error::invalid(
            "gamma0",
            "gamma0 + gamma_f must be > 0 for fluorescence readout",
        ));
    }
    let s = five_level_steady_state(p)?;
    Ok(readout_value(p, &s, readout))
}

/// Triplet fluorescence signal, up to an overall collection factor.
pub fn five_level_fluorescence(p: &FiveLevelParams) -> Result<f64> {
    five_level_readout(p, Readout::Fluorescence)
}

/// IR absorption signal, proportional to the singlet population ρss.
pub fn five_level_ir_absorption(p: &FiveLevelParams) -> Result<f64> {
    five_level_readout(p, Readout::IrAbsorption)
}

pub fn five_level_fluorescence_baseline(p: &FiveLevelParams) -> Result<f64> {
    five_level_fluorescence(&p.with_rabi(0.0).with_detuning(0.0))
}

pub fn five_level_ir_baseline(p: &FiveLevelParams) -> Result<f64> {
    five_level_ir_absorption(&p.with_rabi(0.0).with_detuning(0.0))
}

fn baseline(p: &FiveLevelParams, readout: Readout) -> Result<f64> {
    five_level_readout(&p.with_rabi(0.0).with_detuning(0.0), readout)
}

/// FWHM (MHz) of the chosen readout, extracted numerically from the exact
/// steady state.
pub fn five_level_numeric_fwhm(p: &FiveLevelParams, readout: Readout) -> Result<f64> {
    let base = baseline(p, readout)?;
    let hint = p.gamma2_eff() / std::f64::consts::PI + p.rabi_hz;
    symmetric_fwhm(|d| five_level_readout(&p.with_detuning(d), readout), base, hint)
}

/// Numerical lineshape summary of a readout.
///
/// For fluorescence the contrast is the fractional dip 1 − S(0)/S(∞). The IR
/// signal is a peak; its contrast is reported as (S(0) − S(∞))/S(0) so that it
/// stays within [0, 1].
pub fn five_level_summary(p: &FiveLevelParams, readout: Readout) -> Result<LineshapeSummary> {
    let base = baseline(p, readout)?;
    let s0 = five_level_readout(&p.with_detuning(0.0), readout)?;
    let contrast = match readout {
        Readout::Fluorescence => 1.0 - s0 / base,
        Readout::IrAbsorption => {
            if s0 > 0.0 {
                (s0 - base) / s0
            } else {
                0.0
            }
        }
    };
    Ok(LineshapeSummary {
        contrast,
        fwhm_hz: five_level_numeric_fwhm(p, readout)?,
        baseline: base,
    })
}

/// An assumption behind the approximate five-level width that the parameters
/// break by more than a factor of ten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegimeViolation {
    /// Γ̃_P is not small compared with Γ0.
    StrongExcitation { ratio: f64 },
    /// γ1 is not small compared with Γs.
    FastRelaxation { ratio: f64 },
    /// Γ0 and Γf differ by more than a factor of ten.
    UnequalDecay { ratio: f64 },
}

impl std::fmt::Display for RegimeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeViolation::StrongExcitation { ratio } => {
                write!(f, "excitation rate / Gamma0 = {ratio:.3} is not << 1")
            }
            RegimeViolation::FastRelaxation { ratio } => {
                write!(f, "gamma1 / Gamma_s = {ratio:.3} is not << 1")
            }
            RegimeViolation::UnequalDecay { ratio } => {
                write!(f, "Gamma0 / Gamma_f = {ratio:.3} is far from 1")
            }
        }
    }
}

/// Approximate five-level width together with any regime diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FiveLevelWidth {
    pub fwhm_hz: f64,
    pub violations: Vec<RegimeViolation>,
}

impl FiveLevelWidth {
    pub fn in_regime(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Approximate FWHM (MHz) including singlet saturation:
/// Δν = sqrt((γ2eff/π)² + 4γ2eff[1+Γ̃_P/(4Γs)]/(γ1+Γ̃_P/4)·f_R²).
///
/// Violated assumptions do not fail the call; they are listed in the result
/// so the caller can fall back to the exact solver.
pub fn five_level_width(p: &FiveLevelParams) -> Result<FiveLevelWidth> {
    p.validate()?;
    let g2 = p.gamma2_eff();
    if g2 <= 0.0 {
        return Err(Error::DegenerateSystem("gamma2_eff = 0: no transverse damping".into()));
    }
    let quarter = 0.25 * p.pump_rate_tilde;
    let f2 = p.rabi_hz * p.rabi_hz;
    let broadening = if f2 == 0.0 {
        0.0
    } else {
        let t1 = p.gamma1 + quarter;
        if t1 == 0.0 {
            return Err(Error::DegenerateSystem("gamma1 + pump/4 = 0 with nonzero drive".into()));
        }
        if p.gamma_s == 0.0 {
            return Err(Error::DegenerateSystem("gamma_s = 0: singlet never empties".into()));
        }
        4.0 * g2 * (1.0 + quarter / p.gamma_s) / t1 * f2
    };

    let mut violations = Vec::new();
    let excitation = p.pump_rate_tilde / p.gamma0;
    if !(excitation <= REGIME_RATIO) {
        violations.push(RegimeViolation::StrongExcitation { ratio: excitation });
    }
    let relax = p.gamma1 / p.gamma_s;
    if !(relax <= REGIME_RATIO) {
        violations.push(RegimeViolation::FastRelaxation { ratio: relax });
    }
    let decay = p.gamma0 / p.gamma_f;
    if !(REGIME_RATIO..=1.0 / REGIME_RATIO).contains(&decay) {
        violations.push(RegimeViolation::UnequalDecay { ratio: decay });
    }
    Ok(FiveLevelWidth {
        fwhm_hz: ((g2 / std::f64::consts::PI).powi(2) + broadening).sqrt(),
        violations,
    })
}

/// The approximate width rewritten in terms of light power, with Γ̃_P = 4cP
/// and the saturation power defined by cP0 = Γs.
pub fn five_level_width_power(gamma1: f64, gamma2: f64, c_per_mw: f64, p0_mw: f64, power_mw: f64, rabi_hz: f64) -> f64 {
    let g2 = gamma2 + 2.0 * c_per_mw * power_mw;
    let broadening = 4.0 * g2 * (1.0 + power_mw / p0_mw) / (gamma1 + c_per_mw * power_mw);
    ((g2 / std::f64::consts::PI).powi(2) + broadening * rabi_hz * rabi_hz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(p: &FiveLevelParams) -> f64 {
        let s = five_level_steady_state(p).unwrap();
        five_level_derivatives(p, &s)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dark_undriven_has_equal_ground_populations() {
        let p = FiveLevelParams {
            pump_rate_tilde: 0.0,
            rabi_hz: 0.0,
            ..Default::default()
        };
        let s = five_level_steady_state(&p).unwrap();
        assert!((s.rho(Level::Ground0) - 0.5).abs() < 1e-14);
        assert!((s.rho(Level::Ground1) - 0.5).abs() < 1e-14);
        for l in [Level::Excited0, Level::Excited1, Level::Singlet] {
            assert!(s.rho(l).abs() < 1e-14);
        }
    }

    #[test]
    fn no_feeding_means_empty_singlet() {
        for f in [0.0, 0.3, 3.0] {
            let p = FiveLevelParams {
                gamma_f: 0.0,
                rabi_hz: f,
                pump_rate_tilde: 2.0,
                ..Default::default()
            };
            assert_eq!(five_level_ir_absorption(&p).unwrap().abs(), 0.0);
        }
    }

    #[test]
    fn defaults_satisfy_equations() {
        for d in [0.0, 0.1, -1.0, 25.0] {
            let p = FiveLevelParams::default().with_detuning(d);
            assert!(residual(&p) < 1e-12, "{}", residual(&p));
            let s = five_level_steady_state(&p).unwrap();
            assert!((s.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saturation_factor_is_two_at_p0() {
        let p = FiveLevelParams {
            pump_rate_tilde: 4.0 * DEFAULT_GAMMA_S,
            rabi_hz: 1.0,
            ..Default::default()
        };
        let quarter = p.pump_rate_tilde / 4.0;
        assert_eq!(1.0 + quarter / p.gamma_s, 2.0);
        // same number through the power form with cP0 = Γs at P = P0
        let c = 0.1;
        let p0 = DEFAULT_GAMMA_S / c;
        let w = five_level_width_power(p.gamma1, p.gamma2, c, p0, p0, 1.0);
        let direct = five_level_width(&p).unwrap().fwhm_hz;
        assert!((w / direct - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unbroadened_width() {
        let p = FiveLevelParams {
            pump_rate_tilde: 0.0,
            rabi_hz: 0.0,
            gamma2: 0.7,
            ..Default::default()
        };
        assert!((five_level_width(&p).unwrap().fwhm_hz - 0.7 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn regime_diagnostics_fire_outside_validity() {
        let ok = FiveLevelParams::default();
        assert!(five_level_width(&ok).unwrap().in_regime());
        let strong = FiveLevelParams {
            pump_rate_tilde: DEFAULT_GAMMA0,
            ..ok
        };
        let w = five_level_width(&strong).unwrap();
        assert!(matches!(w.violations[..], [RegimeViolation::StrongExcitation { .. }]));
        let fast = FiveLevelParams {
            gamma1: DEFAULT_GAMMA_S,
            gamma2: 10.0,
            ..ok
        };
        assert!(matches!(
            five_level_width(&fast).unwrap().violations[..],
            [RegimeViolation::FastRelaxation { .. }]
        ));
    }

    #[test]
    fn approximate_width_close_to_exact_in_regime() {
        let p = FiveLevelParams {
            pump_rate_tilde: DEFAULT_GAMMA0 / 100.0,
            gamma1: DEFAULT_GAMMA_S / 100.0,
            rabi_hz: 1.0,
            ..Default::default()
        };
        let approx = five_level_width(&p).unwrap().fwhm_hz;
        let exact = five_level_numeric_fwhm(&p, Readout::Fluorescence).unwrap();
        assert!((approx / exact - 1.0).abs() < 0.01, "{approx} vs {exact}");
    }

    #[test]
    fn ir_absorption_peaks_where_fluorescence_dips() {
        let p = FiveLevelParams {
            rabi_hz: 1.0,
            ..Default::default()
        };
        let fl = five_level_summary(&p, Readout::Fluorescence).unwrap();
        let ir = five_level_summary(&p, Readout::IrAbsorption).unwrap();
        assert!(fl.contrast > 0.0 && ir.contrast > 0.0);
        assert!(five_level_ir_absorption(&p).unwrap() > ir.baseline);
        assert!((fl.fwhm_hz / ir.fwhm_hz - 1.0).abs() < 1e-9);
    }
}
