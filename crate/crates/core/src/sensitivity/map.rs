use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{photon_rate, shot_noise_sensitivity, PhotonBudget};
use crate::error::{Error, Result};
use crate::lineshape::{total_width_model, APModelParams, ContrastModelParams, HyperfineModel, WidthModelParams};
use crate::numeric::format_f64;
use crate::presets;

/// Cells below which a map is flagged as sparse.
const MIN_CELLS: usize = 100;

/// How the per-component amplitude from the contrast model becomes the
/// on-resonance contrast used in the sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastRelation {
    /// C = 3A, the limit of components much wider than the splitting.
    #[default]
    Triple,
    /// C = A·[1 + 2g²/(A_hf² + g²)] with g half the modelled width.
    Exact,
}

/// Everything needed to evaluate S_B at an arbitrary (P, f_R).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityModel {
    /// Width model; its a(P)/γ2 entries are ignored in favour of `ap`.
    pub width: WidthModelParams,
    pub ap: APModelParams,
    pub contrast: ContrastModelParams,
    pub budget: PhotonBudget,
    pub relation: ContrastRelation,
    pub splitting_hz: f64,
    /// Multiplies every photon rate.
    pub rate_boost: f64,
}

impl SensitivityModel {
    /// Surrogate models with the reference parameter set.
    pub fn reference() -> Self {
        Self {
            width: presets::width_model(&[]),
            ap: presets::ap_model(),
            contrast: presets::contrast_model(),
            budget: PhotonBudget::default(),
            relation: ContrastRelation::Triple,
            splitting_hz: presets::HYPERFINE_SPLITTING_MHZ,
            rate_boost: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut w = self.width.clone();
        w.a_over_g2.clear();
        w.validate()?;
        self.budget.validate()?;
        if !(self.rate_boost > 0.0 && self.rate_boost.is_finite()) {
            return Err(Error::invalid("rate_boost", "must be finite and > 0"));
        }
        Ok(())
    }

    /// (width MHz, contrast, photon rate 1/s) at one setting.
    pub fn ingredients(&self, power_mw: f64, rabi_hz: f64) -> Result<(f64, f64, f64)> {
        let w = WidthModelParams {
            a_over_g2: vec![self.ap.a_of_p(power_mw)],
            ..self.width.clone()
        };
        let fwhm = total_width_model(&w, power_mw, 0, rabi_hz)?;
        let amp = self.contrast.eval(power_mw, rabi_hz);
        let c = match self.relation {
            ContrastRelation::Triple => 3.0 * amp,
            ContrastRelation::Exact => amp * HyperfineModel::contrast_factor(0.5 * fwhm, self.splitting_hz),
        };
        let rate = photon_rate(&self.budget, power_mw)? * self.rate_boost;
        Ok((fwhm, c, rate))
    }

    /// S_B in T/√Hz at one setting.
    pub fn sensitivity(&self, power_mw: f64, rabi_hz: f64) -> Result<f64> {
        let (fwhm, c, rate) = self.ingredients(power_mw, rabi_hz)?;
        shot_noise_sensitivity(&self.budget, fwhm, c, rate)
    }
}

/// S_B over a (P, f_R) grid; `values[i][j]` belongs to `powers[i]`, `rabis[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMap {
    pub powers: Vec<f64>,
    pub rabis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Indices of the smallest finite cell.
    pub argmin: Option<(usize, usize)>,
    pub notes: Vec<String>,
}

impl SensitivityMap {
    /// (P, f_R, S_B) of the best cell.
    pub fn best(&self) -> Option<(f64, f64, f64)> {
        self.argmin
            .map(|(i, j)| (self.powers[i], self.rabis[j], self.values[i][j]))
    }

    pub fn cells(&self) -> usize {
        self.powers.len() * self.rabis.len()
    }

    /// `power_mw rabi_mhz sensitivity_t_per_rthz` rows; non-finite cells as NA.
    pub fn to_columns_text(&self) -> String {
        let mut s = String::from("# odmr sensitivity map\npower_mw rabi_mhz sensitivity_t_per_rthz\n");
        for (i, p) in self.powers.iter().enumerate() {
            for (j, f) in self.rabis.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{} {} {}",
                    format_f64(*p),
                    format_f64(*f),
                    cell_text(self.values[i][j])
                );
            }
        }
        s
    }

    /// Matrix with one row per power and one column per Rabi frequency.
    pub fn to_matrix_text(&self) -> String {
        let mut s = String::from("# rows: power_mw, columns: rabi_mhz, values: sensitivity_t_per_rthz\n");
        let head: Vec<String> = self.rabis.iter().map(|f| format_f64(*f)).collect();
        let _ = writeln!(s, "power_mw {}", head.join(" "));
        for (i, p) in self.powers.iter().enumerate() {
            let row: Vec<String> = self.values[i].iter().map(|v| cell_text(*v)).collect();
            let _ = writeln!(s, "{} {}", format_f64(*p), row.join(" "));
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::from("# odmr sensitivity optimum\n");
        match self.best() {
            Some((p, f, v)) => {
                let _ = writeln!(s, "power_mw = {}", format_f64(p));
                let _ = writeln!(s, "rabi_mhz = {}", format_f64(f));
                let _ = writeln!(s, "sensitivity_t_per_rthz = {}", format_f64(v));
            }
            None => s.push_str("sensitivity_t_per_rthz = NA\n"),
        }
        let _ = writeln!(s, "cells = {}", self.cells());
        for n in &self.notes {
            let _ = writeln!(s, "# note: {n}");
        }
        s
    }
}

fn cell_text(v: f64) -> String {
    if v.is_finite() {
        format_f64(v)
    } else {
        "NA".to_string()
    }
}

fn assemble(powers: &[f64], rabis: &[f64], flat: Vec<f64>) -> SensitivityMap {
    let values: Vec<Vec<f64>> = flat.chunks(rabis.len().max(1)).map(|c| c.to_vec()).collect();
    let mut argmin = None;
    let mut best = f64::INFINITY;
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.is_finite() && *v < best {
                best = *v;
                argmin = Some((i, j));
            }
        }
    }
    let mut notes = Vec::new();
    if powers.len() * rabis.len() < MIN_CELLS {
        notes.push(format!(
            "sparse map: {} cells (fewer than {MIN_CELLS})",
            powers.len() * rabis.len()
        ));
    }
    SensitivityMap {
        powers: powers.to_vec(),
        rabis: rabis.to_vec(),
        values,
        argmin,
        notes,
    }
}

fn check(model: &SensitivityModel, powers: &[f64], rabis: &[f64]) -> Result<()> {
    model.validate()?;
    if powers.is_empty() || rabis.is_empty() {
        return Err(Error::invalid("grid", "need at least one power and one Rabi frequency"));
    }
    if powers.iter().chain(rabis).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid(
            "grid",
            "powers and Rabi frequencies must be finite and > 0",
        ));
    }
    Ok(())
}

/// Evaluates S_B on every cell in parallel.
pub fn sensitivity_map(model: &SensitivityModel, powers: &[f64], rabis: &[f64]) -> Result<SensitivityMap> {
    check(model, powers, rabis)?;
    let flat = (0..powers.len() * rabis.len())
        .into_par_iter()
        .map(|k| model.sensitivity(powers[k / rabis.len()], rabis[k % rabis.len()]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(assemble(powers, rabis, flat))
}

/// Same as [`sensitivity_map`] on one thread.
pub fn sensitivity_map_serial(model: &SensitivityModel, powers: &[f64], rabis: &[f64]) -> Result<SensitivityMap> {
    check(model, powers, rabis)?;
    let mut flat = Vec::with_capacity(powers.len() * rabis.len());
    for p in powers {
        for f in rabis {
            flat.push(model.sensitivity(*p, *f)?);
        }
    }
    Ok(assemble(powers, rabis, flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_space;

    fn axes() -> (Vec<f64>, Vec<f64>) {
        (log_space(0.02, 500.0, 25), log_space(0.05, 2.0, 20))
    }

    #[test]
    fn optimum_at_highest_power() {
        let (p, f) = axes();
        let map = sensitivity_map(&SensitivityModel::reference(), &p, &f).unwrap();
        let (pb, fb, sb) = map.best().unwrap();
        assert_eq!(pb, 500.0);
        assert!((0.3..=1.2).contains(&fb), "{fb}");
        assert!(sb > 0.05e-9 && sb < 0.2e-9, "{sb:e}");
        assert!(map.notes.is_empty());
    }

    #[test]
    fn parallel_equals_serial() {
        let (p, f) = axes();
        let m = SensitivityModel::reference();
        assert_eq!(
            sensitivity_map(&m, &p, &f).unwrap(),
            sensitivity_map_serial(&m, &p, &f).unwrap()
        );
    }

    #[test]
    fn rate_boost_scales_every_cell() {
        let (p, f) = axes();
        let base = SensitivityModel::reference();
        let boosted = SensitivityModel {
            rate_boost: 100.0,
            ..base.clone()
        };
        let a = sensitivity_map(&base, &p, &f).unwrap();
        let b = sensitivity_map(&boosted, &p, &f).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x / y - 10.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decreasing_in_power_above_threshold_rabi() {
        let m = SensitivityModel::reference();
        let powers = log_space(0.02, 500.0, 60);
        for f in [0.34, 0.5, 0.62, 0.85, 1.14] {
            let s: Vec<f64> = powers.iter().map(|p| m.sensitivity(*p, f).unwrap()).collect();
            assert!(s.windows(2).all(|w| w[1] < w[0]), "f = {f}");
        }
    }

    #[test]
    fn export_marks_missing_cells() {
        let map = assemble(&[1.0, 2.0], &[0.5, 1.0], vec![1e-9, f64::INFINITY, f64::NAN, 2e-9]);
        let cols = map.to_columns_text();
        assert_eq!(cols.lines().filter(|l| l.ends_with("NA")).count(), 2);
        assert_eq!(cols.lines().count(), 6);
        assert!(map.to_matrix_text().contains("2.0 NA 2e-9"));
        assert_eq!(map.argmin, Some((0, 0)));
        assert_eq!(map.notes.len(), 1);
    }
}
