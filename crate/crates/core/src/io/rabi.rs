use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calibration f_R = k·√P_MW of the Rabi frequency against microwave power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiCalibration {
    /// MHz per √(power unit).
    pub k_rabi: f64,
    /// (microwave power setting, measured f_R in MHz).
    pub records: Vec<(f64, f64)>,
    /// RMS of f_R − k√P (MHz).
    pub residual_rms: f64,
    /// Largest |f_R − k√P|/f_R.
    pub max_rel_residual: f64,
    /// Coefficient q of an auxiliary fit f_R = k'√P + q·P; far from zero when
    /// the data bend away from a square root. `None` with fewer than 3 records.
    pub linear_term: Option<f64>,
}

impl RabiCalibration {
    pub fn rabi_for(&self, p_mw: f64) -> f64 {
        self.k_rabi * p_mw.sqrt()
    }

    /// Microwave power needed for Rabi frequency `f`.
    pub fn power_for(&self, rabi_mhz: f64) -> f64 {
        (rabi_mhz / self.k_rabi).powi(2)
    }
}

/// Least-squares k for f_R = k·√P, with residual diagnostics.
pub fn fit_rabi_calibration(records: &[(f64, f64)]) -> Result<RabiCalibration> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} calibration records, need 2",
            records.len()
        )));
    }
    if records
        .iter()
        .any(|(p, f)| !(p.is_finite() && f.is_finite() && *p > 0.0 && *f > 0.0))
    {
        return Err(Error::invalid(
            "records",
            "powers and Rabi frequencies must be finite and > 0",
        ));
    }
    let k = records.iter().map(|(p, f)| f * p.sqrt()).sum::<f64>() / records.iter().map(|(p, _)| p).sum::<f64>();
    let res: Vec<f64> = records.iter().map(|(p, f)| f - k * p.sqrt()).collect();
    let residual_rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    let max_rel_residual = res
        .iter()
        .zip(records)
        .map(|(r, (_, f))| (r / f).abs())
        .fold(0.0, f64::max);
    let linear_term = (records.len() >= 3).then(|| {
        let (mut a, mut b) = (Matrix2::zeros(), Vector2::zeros());
        for (p, f) in records {
            let row = Vector2::new(p.sqrt(), *p);
            a += row * row.transpose();
            b += row * *f;
        }
        a.lu().solve(&b).map_or(f64::NAN, |x| x[1])
    });
    Ok(RabiCalibration {
        k_rabi: k,
        records: records.to_vec(),
        residual_rms,
        max_rel_residual,
        linear_term,
    })
}
