use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::args::{
    FitArgs, GlobalFitArgs, MapArgs, P1FormArg, RelationArg, SimModel, SimulateArgs, SynthGridArgs, TargetArg,
};
use crate::error::{Error, Result};
use crate::fitting::{
    fit_ap_curve, fit_spectrum, global_contrast_fit, global_width_fit, ExclusionConfig, FitReport,
    GlobalContrastOptions, GlobalWidthOptions, GridRecord, MeasurementGrid, AP_NAMES, CONTRAST_NAMES, PARAM_NAMES,
    WIDTH_SCALAR_NAMES,
};
use crate::io::{
    read_grid, read_spectrum, synth_grid as synth_grid_data, synth_spectrum, write_fit_report, write_grid,
    write_spectrum, GridNoise, SideResonance, Spectrum, SpectrumMeta, NOISE_FREE_SIGMA,
};
use crate::lineshape::{total_width_model, HyperfineModel};
use crate::numeric::{format_f64, lin_space, log_space};
use crate::presets;
use crate::sensitivity::{sensitivity_map as build_map, SensitivityModel};
use crate::spin::{
    five_level_fluorescence, five_level_fluorescence_baseline, five_level_ir_absorption, five_level_ir_baseline,
    five_level_numeric_fwhm, two_level_baseline, two_level_signal, two_level_width, FiveLevelParams, Readout,
    TwoLevelParams, DEFAULT_GAMMA0, DEFAULT_GAMMA_F, DEFAULT_GAMMA_S,
};

pub const MANIFEST_FILE: &str = "manifest.toml";
const GRID_FILE: &str = "grid.txt";
const FAILURES_FILE: &str = "fit_failures.txt";

fn check_axis(name: &'static str, v: &[f64], positive: bool) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(name, "needs at least one value"));
    }
    for &x in v {
        if !x.is_finite() || x < 0.0 || (positive && x == 0.0) {
            return Err(Error::invalid(name, format!("value {x} out of range")));
        }
    }
    Ok(())
}

fn setting_file(i: usize, j: usize) -> String {
    format!("spectrum_p{i:02}_f{j:02}.txt")
}

fn settings(powers: &[f64], rabis: &[f64]) -> Vec<(usize, usize, f64, f64)> {
    let mut v = Vec::with_capacity(powers.len() * rabis.len());
    for (i, &p) in powers.iter().enumerate() {
        for (j, &f) in rabis.iter().enumerate() {
            v.push((i, j, p, f));
        }
    }
    v
}

/// Fully resolved `simulate` options, as echoed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub model: SimModel,
    pub powers: Vec<f64>,
    pub rabis: Vec<f64>,
    /// Spectrum k (power-major order) uses seed + k.
    pub seed: u64,
    pub noise: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub pump_per_mw: f64,
    pub theta: f64,
    pub gamma0: f64,
    pub gamma_f: f64,
    pub gamma_s: f64,
    pub side_contrast: f64,
    pub delta_side_mhz: f64,
    pub side_hwhm_mhz: f64,
    pub center_mhz: f64,
    pub points: usize,
}

impl SimulateConfig {
    pub fn resolve(a: SimulateArgs) -> Result<Self> {
        let c = Self {
            model: a.model.unwrap_or(SimModel::TwoLevel),
            powers: a.powers.map_or(vec![1.0], |x| x.0),
            rabis: a.rabis.map_or(vec![1.0], |x| x.0),
            seed: a.seed.unwrap_or(0),
            noise: a.noise.unwrap_or(0.0),
            gamma1: a.gamma1.unwrap_or(presets::RATIO_G1_G2),
            gamma2: a.gamma2.unwrap_or(1.0),
            pump_per_mw: a.pump_per_mw.unwrap_or(presets::C_OVER_G2),
            theta: a.theta.unwrap_or(presets::THETA),
            gamma0: a.gamma0.unwrap_or(DEFAULT_GAMMA0),
            gamma_f: a.gamma_f.unwrap_or(DEFAULT_GAMMA_F),
            gamma_s: a.gamma_s.unwrap_or(DEFAULT_GAMMA_S),
            side_contrast: a.side_contrast.unwrap_or(0.0),
            delta_side_mhz: a.delta_side_mhz.unwrap_or(presets::SIDE_RESONANCE_DELTA_MHZ),
            side_hwhm_mhz: a.side_hwhm_mhz.unwrap_or(1.0),
            center_mhz: a.center_mhz.unwrap_or(presets::CENTER_MHZ),
            points: a.points.unwrap_or(801),
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        check_axis("powers", &self.powers, false)?;
        check_axis("rabis", &self.rabis, false)?;
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::invalid("noise", format!("must be >= 0, got {}", self.noise)));
        }
        if !(self.pump_per_mw.is_finite() && self.pump_per_mw >= 0.0) {
            return Err(Error::invalid(
                "pump_per_mw",
                format!("must be >= 0, got {}", self.pump_per_mw),
            ));
        }
        if self.points < 5 {
            return Err(Error::invalid("points", "need at least 5"));
        }
        if !self.center_mhz.is_finite() {
            return Err(Error::invalid("center_mhz", "must be finite"));
        }
        if !(self.side_contrast.is_finite() && self.side_contrast >= 0.0) {
            return Err(Error::invalid("side_contrast", "must be >= 0"));
        }
        if self.side_contrast > 0.0 && !(self.side_hwhm_mhz > 0.0 && self.delta_side_mhz > 0.0) {
            return Err(Error::invalid(
                "side_hwhm_mhz",
                "side dips need positive width and distance",
            ));
        }
        // Catch bad rates before any output is written.
        self.two_level(1.0, 1.0).validate()?;
        self.five_level(1.0, 1.0).validate()
    }

    fn two_level(&self, p: f64, f: f64) -> TwoLevelParams {
        TwoLevelParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            pump_rate: self.pump_per_mw * p,
            rabi_hz: f,
            detuning_hz: 0.0,
            theta: self.theta,
        }
    }

    /// Five-level rates with Γ̃_P = 4cP, so the low-excitation limit matches
    /// the two-level model with Γ_P = cP.
    fn five_level(&self, p: f64, f: f64) -> FiveLevelParams {
        FiveLevelParams {
            gamma0: self.gamma0,
            gamma_f: self.gamma_f,
            gamma_s: self.gamma_s,
            pump_rate_tilde: 4.0 * self.pump_per_mw * p,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            rabi_hz: f,
            detuning_hz: 0.0,
        }
    }

    fn spectrum(&self, k: usize, p: f64, f: f64) -> Result<Spectrum> {
        let seed = self.seed.wrapping_add(k as u64);
        let mut spec = match self.model {
            SimModel::Hyperfine => self.hyperfine(p, f, seed)?,
            _ => self.spin_spectrum(p, f, seed)?,
        };
        spec.meta.power_mw = Some(p);
        spec.meta.rabi_mhz = Some(f);
        spec.meta.extra.insert("model".into(), model_name(self.model).into());
        spec.meta.extra.insert("seed".into(), seed.to_string());
        Ok(spec)
    }

    fn hyperfine(&self, p: f64, f: f64, seed: u64) -> Result<Spectrum> {
        let width = presets::width_model(&[p]);
        let g = 0.5 * total_width_model(&width, p, 0, f)?;
        let amp = presets::contrast_model().eval(p, f);
        let truth = HyperfineModel::new(amp, self.center_mhz, g);
        let side = (self.side_contrast > 0.0).then_some(SideResonance {
            delta_mhz: self.delta_side_mhz,
            contrast: self.side_contrast,
            hwhm_mhz: self.side_hwhm_mhz,
        });
        let mut spec = synth_spectrum(&truth, side, self.noise, seed, None)?;
        spec.meta.sample_id = Some("hyperfine".into());
        Ok(spec)
    }

    fn spin_spectrum(&self, p: f64, f: f64, seed: u64) -> Result<Spectrum> {
        let (fwhm, signal): (f64, Box<dyn Fn(f64) -> Result<f64>>) = match self.model {
            SimModel::TwoLevel => {
                let q = self.two_level(p, f);
                let base = two_level_baseline(&q)?;
                (
                    two_level_width(&q)?,
                    Box::new(move |d| Ok(two_level_signal(&q.with_detuning(d))? / base)),
                )
            }
            SimModel::FiveLevelFluorescence => {
                let q = self.five_level(p, f);
                let base = five_level_fluorescence_baseline(&q)?;
                let w = five_level_numeric_fwhm(&q, Readout::Fluorescence)?;
                (
                    w,
                    Box::new(move |d| Ok(five_level_fluorescence(&q.with_detuning(d))? / base)),
                )
            }
            SimModel::FiveLevelIr => {
                let q = self.five_level(p, f);
                let base = five_level_ir_baseline(&q)?;
                if base <= 0.0 {
                    return Err(Error::DegenerateSystem(
                        "IR baseline is zero (no optical pumping)".into(),
                    ));
                }
                // Scan range follows the fluorescence width so both readouts
                // share a frequency grid.
                let w = five_level_numeric_fwhm(&q, Readout::Fluorescence)?;
                // Transmitted IR: more singlet population means a dip.
                (
                    w,
                    Box::new(move |d| Ok(2.0 - five_level_ir_absorption(&q.with_detuning(d))? / base)),
                )
            }
            SimModel::Hyperfine => unreachable!("handled by hyperfine()"),
        };
        let half = 10.0 * fwhm;
        let freq = lin_space(self.center_mhz - half, self.center_mhz + half, self.points);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.noise).map_err(|e| Error::invalid("noise", e.to_string()))?;
        let mut values = Vec::with_capacity(freq.len());
        for nu in &freq {
            let mut s = signal(nu - self.center_mhz)?;
            if self.noise > 0.0 {
                s += noise.sample(&mut rng);
            }
            values.push(s);
        }
        let sigma = if self.noise > 0.0 { self.noise } else { NOISE_FREE_SIGMA };
        let spec = Spectrum {
            sigma: vec![sigma; freq.len()],
            freq_mhz: freq,
            signal: values,
            meta: SpectrumMeta {
                sample_id: Some("simulated".into()),
                ..SpectrumMeta::default()
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn model_name(m: SimModel) -> &'static str {
    match m {
        SimModel::TwoLevel => "two-level",
        SimModel::FiveLevelFluorescence => "five-level-fluorescence",
        SimModel::FiveLevelIr => "five-level-ir",
        SimModel::Hyperfine => "hyperfine",
    }
}

pub fn simulate(cfg: &SimulateConfig, out: &Path) -> Result<()> {
    let jobs = settings(&cfg.powers, &cfg.rabis);
    let spectra: Vec<Result<Spectrum>> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(_, _, p, f))| cfg.spectrum(k, p, f))
        .collect();
    std::fs::create_dir_all(out)?;
    for ((i, j, _, _), spec) in jobs.iter().zip(spectra) {
        write_spectrum(&out.join(setting_file(*i, *j)), &spec?)?;
    }
    log::info!("wrote {} spectra to {}", jobs.len(), out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    pub input: PathBuf,
    pub ahf_mhz: f64,
    pub exclude_side_mhz: f64,
    pub exclude_width_mhz: f64,
    pub no_exclusion: bool,
}

impl FitConfig {
    pub fn resolve(a: FitArgs) -> Result<Self> {
        let c = Self {
            input: a
                .input
                .ok_or_else(|| Error::Config("fit needs --input (a spectrum file or directory)".into()))?,
            ahf_mhz: a.ahf_mhz.unwrap_or(presets::HYPERFINE_SPLITTING_MHZ),
            exclude_side_mhz: a.exclude_side_mhz.unwrap_or(presets::SIDE_RESONANCE_DELTA_MHZ),
            exclude_width_mhz: a.exclude_width_mhz.unwrap_or(presets::SIDE_EXCLUSION_WIDTH_MHZ),
            no_exclusion: a.no_exclusion.unwrap_or(false),
        };
        if !(c.ahf_mhz.is_finite() && c.ahf_mhz >= 0.0) {
            return Err(Error::invalid("ahf_mhz", "must be >= 0"));
        }
        if !c.no_exclusion && !(c.exclude_side_mhz > 0.0 && c.exclude_width_mhz > 0.0) {
            return Err(Error::invalid(
                "exclude_side_mhz",
                "exclusion distance and width must be > 0",
            ));
        }
        Ok(c)
    }

    pub fn exclusion(&self) -> ExclusionConfig {
        ExclusionConfig {
            enabled: !self.no_exclusion,
            delta_mhz: self.exclude_side_mhz,
            width_mhz: self.exclude_width_mhz,
        }
    }
}

/// Files written by this tool that a directory scan must not treat as
/// spectra.
fn is_spectrum_candidate(path: &Path) -> bool {
    let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
        return false;
    };
    name.ends_with(".txt")
        && !name.ends_with(".fit.txt")
        && ![
            GRID_FILE,
            FAILURES_FILE,
            "summary.txt",
            "width_fit.txt",
            "contrast_fit.txt",
            "ap_fit.txt",
        ]
        .contains(&name)
        && !name.starts_with("sensitivity_")
}

fn spectrum_files(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if !input.is_dir() {
        return Err(Error::Config(format!("input {} does not exist", input.display())));
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(input)? {
        let path = entry?.path();
        if path.is_file() && is_spectrum_candidate(&path) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no spectrum files in {}",
            input.display()
        )));
    }
    Ok(files)
}

fn grid_record(spec: &Spectrum, report: &FitReport) -> Option<GridRecord> {
    let (power_mw, rabi_hz) = (spec.meta.power_mw?, spec.meta.rabi_mhz?);
    let a = report.get(PARAM_NAMES[0])?;
    let g = report.get(PARAM_NAMES[2])?;
    if !(a.ci68.is_finite() && g.ci68.is_finite()) {
        return None;
    }
    let width = 2.0 * g.value;
    // Noise-free fits can report zero uncertainty; keep the weights finite.
    let floor = |v: f64| 1e-9 * v.abs().max(1e-12);
    Some(GridRecord {
        power_mw,
        rabi_hz,
        width_hz: width,
        width_sigma: (2.0 * g.ci68).max(floor(width)),
        amplitude: a.value,
        amplitude_sigma: a.ci68.max(floor(a.value)),
    })
}

/// Fits every spectrum, writes `<stem>.fit.txt` reports and, when the spectra
/// carry power and Rabi metadata, a `grid.txt` for `global-fit`.
///
/// Failed fits are listed in `fit_failures.txt`; the first failure is
/// returned after all other outputs are written.
pub fn fit(cfg: &FitConfig, out: &Path) -> Result<()> {
    let files = spectrum_files(&cfg.input)?;
    let exclusion = cfg.exclusion();
    let results: Vec<(Result<Spectrum>, Result<FitReport>)> = files
        .par_iter()
        .map(|path| match read_spectrum(path) {
            Ok(spec) => {
                let r = fit_spectrum(&spec, cfg.ahf_mhz, &exclusion);
                (Ok(spec), r)
            }
            Err(e) => (
                Err(Error::Config(format!("{}: {e}", path.display()))),
                Err(Error::Config(String::new())),
            ),
        })
        .collect();
    std::fs::create_dir_all(out)?;
    let mut records = Vec::new();
    let mut failures = String::new();
    let mut first_error = None;
    for (path, (spec, report)) in files.iter().zip(results) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let outcome = spec.and_then(|s| report.map(|r| (s, r)));
        match outcome {
            Ok((spec, report)) => {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                write_fit_report(&out.join(format!("{stem}.fit.txt")), &report)?;
                match grid_record(&spec, &report) {
                    Some(r) => records.push(r),
                    None => log::warn!("{name}: no power/Rabi metadata or unbounded uncertainty; left out of the grid"),
                }
            }
            Err(e) => {
                log::error!("{name}: {e}");
                let _ = writeln!(
                    failures,
                    "{name} kind={} message={:?}",
                    super::error_kind(&e),
                    e.to_string()
                );
                first_error.get_or_insert(e);
            }
        }
    }
    if !records.is_empty() {
        let grid = MeasurementGrid::new(records);
        match grid.validate() {
            Ok(()) => write_grid(&out.join(GRID_FILE), &grid)?,
            Err(e) => log::warn!("grid not written: {e}"),
        }
    }
    let failures_path = out.join(FAILURES_FILE);
    if failures.is_empty() {
        if failures_path.exists() {
            std::fs::remove_file(failures_path)?;
        }
    } else {
        std::fs::write(failures_path, failures)?;
    }
    first_error.map_or(Ok(()), Err)
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalFitConfig {
    pub input: PathBuf,
    pub p1_form: P1FormArg,
    pub contrast_target: TargetArg,
    pub ahf_mhz: f64,
}

impl GlobalFitConfig {
    pub fn resolve(a: GlobalFitArgs) -> Result<Self> {
        let c = Self {
            input: a
                .input
                .ok_or_else(|| Error::Config("global-fit needs --input (a grid file)".into()))?,
            p1_form: a.p1_form.unwrap_or(P1FormArg::Squared),
            contrast_target: a.contrast_target.unwrap_or(TargetArg::Amplitude),
            ahf_mhz: a.ahf_mhz.unwrap_or(presets::HYPERFINE_SPLITTING_MHZ),
        };
        if !(c.ahf_mhz.is_finite() && c.ahf_mhz >= 0.0) {
            return Err(Error::invalid("ahf_mhz", "must be >= 0"));
        }
        Ok(c)
    }
}

fn summary_params(s: &mut String, report: &FitReport, names: &[&str]) {
    for n in names {
        if let Some(p) = report.get(n) {
            let _ = writeln!(s, "{n} = {} ± {}", format_f64(p.value), format_f64(p.ci68));
        }
    }
    if !report.unidentifiable.is_empty() {
        let _ = writeln!(s, "unidentifiable = {}", report.unidentifiable.join(" "));
    }
    for note in &report.notes {
        let _ = writeln!(s, "# note: {note}");
    }
}

fn summary_error(s: &mut String, stage: &str, e: &Error) {
    let _ = writeln!(s, "{stage}_status = error");
    let _ = writeln!(
        s,
        "{stage}_error = kind={} message={:?}",
        super::error_kind(e),
        e.to_string()
    );
    if let Error::UnidentifiableParameter { params } | Error::SingularJacobian { params } = e {
        let _ = writeln!(s, "unidentifiable = {}", params.join(" "));
    }
}

/// Runs the width, contrast and a(P) fits and writes one report per stage
/// plus `summary.txt` with every fitted parameter. A failing stage
/// is recorded in the summary and its error returned once everything else
/// is written.
pub fn global_fit(cfg: &GlobalFitConfig, out: &Path) -> Result<()> {
    let grid = read_grid(&cfg.input)?;
    std::fs::create_dir_all(out)?;
    let mut summary = String::from("# odmr global fit summary\n");
    let mut first_error: Option<Error> = None;

    let _ = writeln!(summary, "\n# width model");
    let width_opts = GlobalWidthOptions {
        p1_form: cfg.p1_form.into(),
        ..GlobalWidthOptions::default()
    };
    let width = match global_width_fit(&grid, &width_opts) {
        Ok(w) => {
            write_fit_report(&out.join("width_fit.txt"), &w.report)?;
            let _ = writeln!(
                summary,
                "width_status = {}",
                if w.report.converged { "ok" } else { "not-converged" }
            );
            summary_params(&mut summary, &w.report, &WIDTH_SCALAR_NAMES);
            Some(w)
        }
        Err(e) => {
            summary_error(&mut summary, "width", &e);
            first_error.get_or_insert(e);
            None
        }
    };

    let _ = writeln!(summary, "\n# contrast model");
    let contrast_opts = GlobalContrastOptions {
        target: cfg.contrast_target.into(),
        splitting_hz: cfg.ahf_mhz,
        ..GlobalContrastOptions::default()
    };
    match global_contrast_fit(&grid, &contrast_opts) {
        Ok(c) => {
            write_fit_report(&out.join("contrast_fit.txt"), &c.report)?;
            let _ = writeln!(
                summary,
                "contrast_status = {}",
                if c.report.converged { "ok" } else { "not-converged" }
            );
            summary_params(&mut summary, &c.report, &CONTRAST_NAMES);
        }
        Err(e) => {
            summary_error(&mut summary, "contrast", &e);
            first_error.get_or_insert(e);
        }
    }

    let _ = writeln!(summary, "\n# a(P) model");
    match &width {
        Some(w) => match fit_ap_curve(&w.a_values()) {
            Ok(ap) => {
                write_fit_report(&out.join("ap_fit.txt"), &ap.report)?;
                let _ = writeln!(
                    summary,
                    "ap_status = {}",
                    if ap.report.converged { "ok" } else { "not-converged" }
                );
                summary_params(&mut summary, &ap.report, &AP_NAMES);
            }
            Err(e) => {
                summary_error(&mut summary, "ap", &e);
                first_error.get_or_insert(e);
            }
        },
        None => {
            let _ = writeln!(summary, "ap_status = skipped");
        }
    }

    std::fs::write(out.join("summary.txt"), summary)?;
    first_error.map_or(Ok(()), Err)
}

#[derive(Debug, Clone, Serialize)]
pub struct MapConfig {
    pub powers: Vec<f64>,
    pub rabis: Vec<f64>,
    pub rate_boost: f64,
    pub contrast_relation: RelationArg,
    pub seed: u64,
}

impl MapConfig {
    pub fn resolve(a: MapArgs) -> Result<Self> {
        let c = Self {
            powers: a.powers.map_or_else(|| log_space(0.02, 500.0, 25), |x| x.0),
            rabis: a.rabis.map_or_else(|| log_space(0.05, 2.0, 20), |x| x.0),
            rate_boost: a.rate_boost.unwrap_or(1.0),
            contrast_relation: a.contrast_relation.unwrap_or(RelationArg::Triple),
            seed: a.seed.unwrap_or(0),
        };
        check_axis("powers", &c.powers, true)?;
        check_axis("rabis", &c.rabis, true)?;
        Ok(c)
    }
}

pub fn sensitivity_map(cfg: &MapConfig, out: &Path) -> Result<()> {
    let model = SensitivityModel {
        rate_boost: cfg.rate_boost,
        relation: cfg.contrast_relation.into(),
        ..SensitivityModel::reference()
    };
    let map = build_map(&model, &cfg.powers, &cfg.rabis)?;
    for n in &map.notes {
        log::warn!("{n}");
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("sensitivity_map.txt"), map.to_columns_text())?;
    std::fs::write(out.join("sensitivity_matrix.txt"), map.to_matrix_text())?;
    std::fs::write(out.join("sensitivity_optimum.txt"), map.summary_text())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthGridConfig {
    pub powers: Vec<f64>,
    pub rabis: Vec<f64>,
    pub seed: u64,
    pub width_noise: f64,
    pub amplitude_noise: f64,
}

impl SynthGridConfig {
    pub fn resolve(a: SynthGridArgs) -> Result<Self> {
        let noise = GridNoise::reference();
        let c = Self {
            powers: a.powers.map_or_else(presets::light_powers, |x| x.0),
            rabis: a.rabis.map_or_else(presets::rabi_settings, |x| x.0),
            seed: a.seed.unwrap_or(0),
            width_noise: a.width_noise.unwrap_or(noise.width_rel),
            amplitude_noise: a.amplitude_noise.unwrap_or(noise.amplitude_rel),
        };
        check_axis("powers", &c.powers, true)?;
        check_axis("rabis", &c.rabis, true)?;
        for (name, v) in [("width_noise", c.width_noise), ("amplitude_noise", c.amplitude_noise)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(c)
    }
}

pub fn synth_grid(cfg: &SynthGridConfig, out: &Path) -> Result<()> {
    let grid = synth_grid_data(
        &presets::width_model(&cfg.powers),
        &presets::contrast_model(),
        &cfg.powers,
        &cfg.rabis,
        GridNoise {
            width_rel: cfg.width_noise,
            amplitude_rel: cfg.amplitude_noise,
        },
        cfg.seed,
    )?;
    std::fs::create_dir_all(out)?;
    write_grid(&out.join(GRID_FILE), &grid)
}
