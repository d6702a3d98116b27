use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::{GridRecord, MeasurementGrid};
use super::lm::{least_squares, LmOptions, ParamSpec, ResidualModel};
use super::report::FitReport;
use crate::error::{Error, Result};
use crate::lineshape::{
    total_width_gradient, total_width_model, APModelParams, ContrastModelParams, HyperfineModel, P1RateForm,
    WidthModelParams,
};

/// Scalar parameters of the width model, followed by one a(P)/γ2 per power.
pub const WIDTH_SCALAR_NAMES: [&str; 5] = ["dnu_inh_mhz", "ratio_g1_g2", "c_over_g2", "p0_mw", "f0_mhz"];
pub const CONTRAST_NAMES: [&str; 3] = ["theta", "g1_over_c_mw", "g1g2"];
pub const AP_NAMES: [&str; 3] = ["a1", "b1_mw", "c1"];

/// Relative ci68 above which a parameter is listed as poorly constrained.
const WEAK_RELATIVE_CI: f64 = 1.0;

pub fn a_name(i: usize) -> String {
    format!("a_over_g2_{i}")
}

fn global_lm() -> LmOptions {
    LmOptions {
        max_iter: 2000,
        allow_singular: true,
        ..LmOptions::default()
    }
}

fn note_weak(report: &mut FitReport) {
    let weak: Vec<String> = report
        .params
        .iter()
        .filter(|p| p.ci68.is_finite() && p.ci68 > WEAK_RELATIVE_CI * p.value.abs())
        .map(|p| p.name.clone())
        .collect();
    if !weak.is_empty() {
        report.notes.push(format!("poorly constrained: {}", weak.join(", ")));
    }
}

fn check_shape(grid: &MeasurementGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.validate()?;
    let (powers, rabis) = (grid.powers(), grid.rabis());
    if rabis.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct Rabi settings, need 3",
            rabis.len()
        )));
    }
    Ok((powers, rabis))
}

#[derive(Debug, Clone)]
pub struct GlobalWidthOptions {
    pub p1_form: P1RateForm,
    /// Starting point; a heuristic one is built from the data when absent.
    pub initial: Option<WidthModelParams>,
    pub lm: LmOptions,
}

impl Default for GlobalWidthOptions {
    fn default() -> Self {
        Self {
            p1_form: P1RateForm::Squared,
            initial: None,
            lm: global_lm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalWidthFit {
    pub report: FitReport,
    pub params: WidthModelParams,
    /// Light power of each a(P)/γ2 entry.
    pub powers: Vec<f64>,
}

impl GlobalWidthFit {
    /// a(P)/γ2 values with their ci68, one per power.
    pub fn a_values(&self) -> Vec<(f64, f64, f64)> {
        (0..self.powers.len())
            .map(|i| {
                let p = self.report.get(&a_name(i)).expect("a entry present");
                (self.powers[i], p.value, p.ci68)
            })
            .collect()
    }
}

struct WidthResiduals<'a> {
    records: &'a [GridRecord],
    index: Vec<usize>,
    n_powers: usize,
    form: P1RateForm,
}

impl WidthResiduals<'_> {
    fn params(&self, x: &[f64]) -> WidthModelParams {
        WidthModelParams {
            dnu_inh_hz: x[0],
            ratio_g1_g2: x[1],
            c_over_g2: x[2],
            p0_mw: x[3],
            f0_hz: x[4],
            a_over_g2: x[5..5 + self.n_powers].to_vec(),
            p1_form: self.form,
        }
    }
}

impl ResidualModel for WidthResiduals<'_> {
    fn n_residuals(&self) -> usize {
        self.records.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let p = self.params(x);
        for (i, r) in self.records.iter().enumerate() {
            let w = total_width_model(&p, r.power_mw, self.index[i], r.rabi_hz).unwrap_or(f64::NAN);
            out[i] = (r.width_hz - w) / r.width_sigma;
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let p = self.params(x);
        jac.fill(0.0);
        for (i, r) in self.records.iter().enumerate() {
            let Ok(g) = total_width_gradient(&p, r.power_mw, self.index[i], r.rabi_hz) else {
                return false;
            };
            let s = -1.0 / r.width_sigma;
            jac[(i, 0)] = s * g.dnu_inh;
            jac[(i, 1)] = s * g.ratio_g1_g2;
            jac[(i, 2)] = s * g.c_over_g2;
            jac[(i, 3)] = s * g.p0;
            jac[(i, 4)] = s * g.f0;
            jac[(i, 5 + self.index[i])] = s * g.a_over_g2;
        }
        true
    }
}

fn width_initial(grid: &MeasurementGrid, powers: &[f64], rabis: &[f64], form: P1RateForm) -> WidthModelParams {
    let min_width = grid.records.iter().map(|r| r.width_hz).fold(f64::INFINITY, f64::min);
    let log_mid = 0.5 * (powers[0].ln() + powers[powers.len() - 1].ln());
    WidthModelParams {
        dnu_inh_hz: 0.8 * min_width,
        ratio_g1_g2: 1e-3,
        a_over_g2: vec![0.1; powers.len()],
        c_over_g2: 0.01,
        p0_mw: log_mid.exp(),
        f0_hz: rabis[rabis.len() / 2],
        p1_form: form,
    }
}

/// Fits every width record at once to the global width model, with one free
/// a(P)/γ2 per distinct light power.
///
/// Entries of a(P)/γ2 the data cannot pin down are listed in
/// `report.unidentifiable` (and weakly pinned ones in `report.notes`) rather
/// than failing the fit.
pub fn global_width_fit(grid: &MeasurementGrid, opts: &GlobalWidthOptions) -> Result<GlobalWidthFit> {
    let (powers, rabis) = check_shape(grid)?;
    if powers.len() < 2 {
        // At one power γ1/γ2, c/γ2 and P0 only enter through two combinations.
        return Err(Error::UnidentifiableParameter {
            params: [1, 2, 3].iter().map(|&i| WIDTH_SCALAR_NAMES[i].to_string()).collect(),
        });
    }
    let init = match &opts.initial {
        Some(p) => {
            if p.a_over_g2.len() != powers.len() {
                return Err(Error::Config(format!(
                    "initial a(P) has {} entries for {} powers",
                    p.a_over_g2.len(),
                    powers.len()
                )));
            }
            p.clone()
        }
        None => width_initial(grid, &powers, &rabis, opts.p1_form),
    };
    let index = grid
        .records
        .iter()
        .map(|r| MeasurementGrid::power_index(&powers, r.power_mw).expect("power from grid"))
        .collect();
    let model = WidthResiduals {
        records: &grid.records,
        index,
        n_powers: powers.len(),
        form: opts.p1_form,
    };
    let mut specs = vec![
        ParamSpec::positive(WIDTH_SCALAR_NAMES[0], init.dnu_inh_hz),
        ParamSpec::positive(WIDTH_SCALAR_NAMES[1], init.ratio_g1_g2),
        ParamSpec::positive(WIDTH_SCALAR_NAMES[2], init.c_over_g2),
        ParamSpec::positive(WIDTH_SCALAR_NAMES[3], init.p0_mw),
        ParamSpec::positive(WIDTH_SCALAR_NAMES[4], init.f0_hz),
    ];
    specs.extend(
        init.a_over_g2
            .iter()
            .enumerate()
            .map(|(i, a)| ParamSpec::positive(a_name(i), *a)),
    );
    let mut report = least_squares(&model, &specs, &opts.lm)?;
    note_weak(&mut report);
    let params = model.params(&report.values());
    Ok(GlobalWidthFit { report, params, powers })
}

/// What the amplitudes of a grid are compared with in the contrast fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastTarget {
    /// Fit the per-component amplitude A directly.
    #[default]
    Amplitude,
    /// Convert A to the on-resonance depth A·[1 + 2g²/(A_hf² + g²)] first.
    Contrast,
}

#[derive(Debug, Clone)]
pub struct GlobalContrastOptions {
    pub target: ContrastTarget,
    pub splitting_hz: f64,
    pub initial: Option<ContrastModelParams>,
    pub lm: LmOptions,
}

impl Default for GlobalContrastOptions {
    fn default() -> Self {
        Self {
            target: ContrastTarget::Amplitude,
            splitting_hz: crate::presets::HYPERFINE_SPLITTING_MHZ,
            initial: None,
            lm: global_lm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalContrastFit {
    pub report: FitReport,
    pub params: ContrastModelParams,
}

struct ContrastResiduals {
    /// (power, rabi, value, sigma)
    points: Vec<(f64, f64, f64, f64)>,
}

fn contrast_params(x: &[f64]) -> ContrastModelParams {
    ContrastModelParams {
        theta: x[0],
        g1_over_c_mw: x[1],
        g1g2: x[2],
    }
}

impl ResidualModel for ContrastResiduals {
    fn n_residuals(&self) -> usize {
        self.points.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let m = contrast_params(x);
        for (o, (p, f, y, s)) in out.iter_mut().zip(&self.points) {
            *o = (y - m.eval(*p, *f)) / s;
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let m = contrast_params(x);
        for (i, (p, f, _, s)) in self.points.iter().enumerate() {
            let g = m.gradient(*p, *f);
            for k in 0..3 {
                jac[(i, k)] = -g[k] / s;
            }
        }
        true
    }
}

/// Fits the contrast model to the amplitudes of every grid record.
pub fn global_contrast_fit(grid: &MeasurementGrid, opts: &GlobalContrastOptions) -> Result<GlobalContrastFit> {
    let (powers, rabis) = check_shape(grid)?;
    if powers.len() < 2 {
        // With one power θ and γ1/c only enter through a single prefactor.
        return Err(Error::UnidentifiableParameter {
            params: vec![CONTRAST_NAMES[0].into(), CONTRAST_NAMES[1].into()],
        });
    }
    let points: Vec<_> = grid
        .records
        .iter()
        .map(|r| {
            let k = match opts.target {
                ContrastTarget::Amplitude => 1.0,
                ContrastTarget::Contrast => HyperfineModel::contrast_factor(0.5 * r.width_hz, opts.splitting_hz),
            };
            (r.power_mw, r.rabi_hz, k * r.amplitude, k * r.amplitude_sigma)
        })
        .collect();
    let init = opts.initial.unwrap_or_else(|| {
        let ymax = points.iter().map(|p| p.2).fold(0.0, f64::max);
        let f_mid = rabis[rabis.len() / 2];
        ContrastModelParams {
            theta: (8.0 * ymax).clamp(1e-6, 1.0),
            g1_over_c_mw: powers[powers.len() / 2],
            g1g2: 4.0 * std::f64::consts::PI.powi(2) * f_mid * f_mid / 10.0,
        }
    });
    let specs = [
        ParamSpec::positive(CONTRAST_NAMES[0], init.theta),
        ParamSpec::positive(CONTRAST_NAMES[1], init.g1_over_c_mw),
        ParamSpec::positive(CONTRAST_NAMES[2], init.g1g2),
    ];
    let model = ContrastResiduals { points };
    let mut report = least_squares(&model, &specs, &opts.lm)?;
    if !report.unidentifiable.is_empty() {
        return Err(Error::UnidentifiableParameter {
            params: report.unidentifiable,
        });
    }
    note_weak(&mut report);
    let params = contrast_params(&report.values());
    Ok(GlobalContrastFit { report, params })
}

struct ApResiduals {
    points: Vec<(f64, f64, f64)>,
}

fn ap_params(x: &[f64]) -> APModelParams {
    APModelParams {
        a1: x[0],
        b1: x[1],
        c1: x[2],
    }
}

impl ResidualModel for ApResiduals {
    fn n_residuals(&self) -> usize {
        self.points.len()
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let m = ap_params(x);
        for (o, (p, a, s)) in out.iter_mut().zip(&self.points) {
            *o = (a - m.a_of_p(*p)) / s;
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let m = ap_params(x);
        for (i, (p, _, s)) in self.points.iter().enumerate() {
            let g = m.gradient(*p);
            for k in 0..3 {
                jac[(i, k)] = -g[k] / s;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct ApFit {
    pub report: FitReport,
    pub params: APModelParams,
}

/// Weighted fit of a(P)/γ2 = a1·P/(1+P/b1) + c1 to (power, a, ci68) triples.
/// Entries with non-finite or non-positive uncertainty are skipped.
pub fn fit_ap_curve(values: &[(f64, f64, f64)]) -> Result<ApFit> {
    fit_ap_curve_with(
        values,
        &LmOptions {
            max_iter: 1000,
            ..LmOptions::default()
        },
    )
}

pub fn fit_ap_curve_with(values: &[(f64, f64, f64)], lm: &LmOptions) -> Result<ApFit> {
    let mut points: Vec<_> = values
        .iter()
        .copied()
        .filter(|(p, a, s)| p.is_finite() && a.is_finite() && s.is_finite() && *s > 0.0)
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    if points.len() < 3 {
        return Err(Error::UnidentifiableParameter {
            params: AP_NAMES.iter().map(|s| s.to_string()).collect(),
        });
    }
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable a(P) values, need 4",
            points.len()
        )));
    }
    let c1 = points[0].1;
    let rise = (points[points.len() - 1].1 - c1).max(1e-3 * c1.abs().max(1e-6));
    let b1 = points[points.len() / 2].0;
    let specs = [
        ParamSpec::positive(AP_NAMES[0], rise / b1),
        ParamSpec::positive(AP_NAMES[1], b1),
        ParamSpec::free(AP_NAMES[2], c1),
    ];
    let model = ApResiduals { points };
    let report = least_squares(&model, &specs, lm)?;
    let params = ap_params(&report.values());
    Ok(ApFit { report, params })
}
