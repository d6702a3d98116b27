//! Photon budget, shot-noise-limited field sensitivity and the (P, f_R)
//! sensitivity map.

mod map;

pub use map::{sensitivity_map, sensitivity_map_serial, ContrastRelation, SensitivityMap, SensitivityModel};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite_nonneg, ensure_positive, Result};

/// Planck constant (J·s), 6 significant digits.
pub const PLANCK: f64 = 6.62607e-34;
/// Speed of light (m/s), 6 significant digits.
pub const SPEED_OF_LIGHT: f64 = 2.99792e8;
/// NV gyromagnetic ratio (1/(s·T)).
pub const NV_GYROMAGNETIC: f64 = 1.761e11;

/// Conversion from pump power to detected fluorescence photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    /// Detected fluorescence per unit pump power at low power.
    pub k_conv: f64,
    pub p_sat_mw: f64,
    pub wavelength_nm: f64,
    /// γ in 1/(s·T).
    pub gyromagnetic: f64,
}

impl Default for PhotonBudget {
    fn default() -> Self {
        Self {
            k_conv: 6.21e-3,
            p_sat_mw: 4.8e3,
            wavelength_nm: 670.0,
            gyromagnetic: NV_GYROMAGNETIC,
        }
    }
}

impl PhotonBudget {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("k_conv", self.k_conv)?;
        ensure_positive("p_sat_mw", self.p_sat_mw)?;
        ensure_positive("wavelength_nm", self.wavelength_nm)?;
        ensure_positive("gyromagnetic", self.gyromagnetic)
    }

    /// Energy of one fluorescence photon (J).
    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)
    }
}

/// Detected fluorescence power k·P/(1 + P/P_sat) in mW.
pub fn fluorescence_power(budget: &PhotonBudget, pump_mw: f64) -> Result<f64> {
    ensure_finite_nonneg("pump_mw", pump_mw)?;
    Ok(budget.k_conv * pump_mw / (1.0 + pump_mw / budget.p_sat_mw))
}

/// Detected photons per second.
pub fn photon_rate(budget: &PhotonBudget, pump_mw: f64) -> Result<f64> {
    ensure_positive("pump_mw", pump_mw)?;
    Ok(fluorescence_power(budget, pump_mw)? * 1e-3 / budget.photon_energy())
}

/// Shot-noise-limited sensitivity (2π/γ)·Δν/(C·√R) in T/√Hz, with the FWHM
/// given in MHz.
///
/// Zero contrast or zero rate gives +∞, logged as a warning.
pub fn shot_noise_sensitivity(budget: &PhotonBudget, fwhm_mhz: f64, contrast: f64, rate: f64) -> Result<f64> {
    ensure_positive("fwhm_mhz", fwhm_mhz)?;
    ensure_finite_nonneg("contrast", contrast)?;
    ensure_finite_nonneg("rate", rate)?;
    if contrast > 1.0 {
        return Err(crate::Error::invalid(
            "contrast",
            format!("must be <= 1, got {contrast}"),
        ));
    }
    if contrast == 0.0 || rate == 0.0 {
        log::warn!("sensitivity diverges: contrast {contrast}, rate {rate}");
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * std::f64::consts::PI / budget.gyromagnetic * fwhm_mhz * 1e6 / (contrast * rate.sqrt()))
}
