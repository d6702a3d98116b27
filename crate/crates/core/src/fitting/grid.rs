use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One (P, f_R) setting with the fitted width and amplitude of its spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub power_mw: f64,
    pub rabi_hz: f64,
    /// FWHM 2g of one hyperfine component (MHz).
    pub width_hz: f64,
    pub width_sigma: f64,
    pub amplitude: f64,
    pub amplitude_sigma: f64,
}

/// Widths and amplitudes measured over a set of light powers and Rabi
/// frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGrid {
    pub records: Vec<GridRecord>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| same(*a, *b));
    v
}

impl MeasurementGrid {
    pub fn new(records: Vec<GridRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            let vals = [
                r.power_mw,
                r.rabi_hz,
                r.width_hz,
                r.width_sigma,
                r.amplitude,
                r.amplitude_sigma,
            ];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("record {i} has a non-finite value")));
            }
            if !(r.width_sigma > 0.0 && r.amplitude_sigma > 0.0) {
                return Err(Error::Schema(format!("record {i} has a non-positive sigma")));
            }
        }
        for (i, a) in self.records.iter().enumerate() {
            for b in &self.records[i + 1..] {
                if same(a.power_mw, b.power_mw) && same(a.rabi_hz, b.rabi_hz) {
                    return Err(Error::Schema(format!(
                        "duplicate setting P = {} mW, f_R = {} MHz",
                        a.power_mw, a.rabi_hz
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sorted distinct light powers.
    pub fn powers(&self) -> Vec<f64> {
        distinct(self.records.iter().map(|r| r.power_mw).collect())
    }

    /// Sorted distinct Rabi frequencies.
    pub fn rabis(&self) -> Vec<f64> {
        distinct(self.records.iter().map(|r| r.rabi_hz).collect())
    }

    /// Index of `power` within [`Self::powers`].
    pub fn power_index(powers: &[f64], power: f64) -> Option<usize> {
        powers.iter().position(|p| same(*p, power))
    }
}
