//! Steady states of the driven two-level and five-level spin models.
//!
//! Units throughout: rates in 1/µs, frequencies (Rabi, detuning, widths) in
//! MHz. Angular quantities carry the explicit 2π, e.g. Ω_R = 2π·f_R, which in
//! these units is rad/µs.

mod five_level;
mod two_level;

pub use five_level::{
    five_level_derivatives, five_level_fluorescence, five_level_fluorescence_baseline, five_level_ir_absorption,
    five_level_ir_baseline, five_level_numeric_fwhm, five_level_readout, five_level_steady_state, five_level_summary,
    five_level_width, five_level_width_power, FiveLevelParams, FiveLevelWidth, Readout, RegimeViolation,
    DEFAULT_GAMMA0, DEFAULT_GAMMA_F, DEFAULT_GAMMA_S,
};
pub use two_level::{
    two_level_baseline, two_level_contrast, two_level_derivatives, two_level_ensemble_contrast, two_level_numeric_fwhm,
    two_level_signal, two_level_steady_state, two_level_summary, two_level_width, TwoLevelParams,
};

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

pub type Complex64 = Complex<f64>;

/// Angular frequency (rad/µs) of a frequency in MHz.
#[inline]
pub fn angular(f_mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_mhz
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground0,
    Ground1,
    Excited0,
    Excited1,
    Singlet,
}

impl Level {
    pub fn label(self) -> &'static str {
        match self {
            Level::Ground0 => "0",
            Level::Ground1 => "1",
            Level::Excited0 => "e0",
            Level::Excited1 => "e1",
            Level::Singlet => "s",
        }
    }
}

/// Steady-state density matrix restricted to the elements the models carry:
/// the diagonal populations and the ground-state coherence ρ01.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub populations: Vec<(Level, f64)>,
    pub coherence01: Complex64,
}

impl SteadyState {
    /// Population of `level`, zero if the model does not contain it.
    pub fn rho(&self, level: Level) -> f64 {
        self.populations
            .iter()
            .find(|(l, _)| *l == level)
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn coherence10(&self) -> Complex64 {
        self.coherence01.conj()
    }

    pub fn trace(&self) -> f64 {
        self.populations.iter().map(|(_, v)| v).sum()
    }
}

/// Contrast, width and off-resonant level of a single Lorentzian ODMR dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeSummary {
    pub contrast: f64,
    pub fwhm_hz: f64,
    pub baseline: f64,
}

impl LineshapeSummary {
    /// Signal at detuning `d` (MHz) of the Lorentzian this summary describes.
    pub fn signal(&self, d: f64) -> f64 {
        let hw = 0.5 * self.fwhm_hz;
        self.baseline * (1.0 - self.contrast * hw * hw / (d * d + hw * hw))
    }
}
