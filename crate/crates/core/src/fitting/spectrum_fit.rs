use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lm::{least_squares, LmOptions, ParamSpec, ResidualModel};
use super::report::FitReport;
use crate::error::{Error, Result};
use crate::io::Spectrum;
use crate::lineshape::HyperfineModel;
use crate::presets;

/// Points kept after exclusion below which a spectrum is not fitted.
pub const MIN_FIT_POINTS: usize = 50;

/// Windows dropped around the NV–P1 side resonances at ν0 ± δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionConfig {
    pub enabled: bool,
    pub delta_mhz: f64,
    pub width_mhz: f64,
}

impl Default for ExclusionConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            delta_mhz: presets::SIDE_RESONANCE_DELTA_MHZ,
            width_mhz: presets::SIDE_EXCLUSION_WIDTH_MHZ,
        }
    }
}

impl ExclusionConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn windows(&self, nu0: f64) -> Vec<(f64, f64)> {
        if !self.enabled {
            return Vec::new();
        }
        let h = 0.5 * self.width_mhz;
        [nu0 - self.delta_mhz, nu0 + self.delta_mhz]
            .iter()
            .map(|c| (c - h, c + h))
            .collect()
    }
}

pub const PARAM_NAMES: [&str; 3] = ["amplitude", "nu0_mhz", "g_mhz"];

/// Weighted residuals of the hyperfine triplet with A_hf held fixed.
pub struct TripletResiduals<'a> {
    pub spectrum: &'a Spectrum,
    pub splitting_hz: f64,
}

impl TripletResiduals<'_> {
    fn model(&self, p: &[f64]) -> HyperfineModel {
        HyperfineModel {
            amplitude: p[0],
            center_hz: p[1],
            hwhm_hz: p[2],
            splitting_hz: self.splitting_hz,
        }
    }
}

impl ResidualModel for TripletResiduals<'_> {
    fn n_residuals(&self) -> usize {
        self.spectrum.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let m = self.model(p);
        let s = self.spectrum;
        for (i, r) in out.iter_mut().enumerate() {
            *r = (s.signal[i] - m.eval(s.freq_mhz[i])) / s.sigma[i];
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let m = self.model(p);
        let s = self.spectrum;
        for i in 0..s.len() {
            let g = m.gradient(s.freq_mhz[i]);
            for k in 0..3 {
                jac[(i, k)] = -g[k] / s.sigma[i];
            }
        }
        true
    }
}

fn moving_average(y: &[f64], half: usize) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Distance from the centre to the first half-depth point of a unit triplet.
fn triplet_hwhm(g: f64, ahf: f64) -> f64 {
    let m = HyperfineModel {
        amplitude: 1.0,
        center_hz: 0.0,
        hwhm_hz: g,
        splitting_hz: ahf,
    };
    let target = 1.0 - 0.5 * (1.0 - m.eval(0.0));
    let dx = g / 20.0;
    let mut x = 0.0;
    while m.eval(x + dx) < target {
        x += dx;
    }
    let (mut lo, mut hi) = (x, x + dx);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if m.eval(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Starting point for [`fit_spectrum`] from the dip position, depth and half
/// width of a smoothed copy of the data, with the triplet overlap undone.
pub fn initial_guess(spec: &Spectrum) -> Result<HyperfineModel> {
    initial_guess_with(spec, presets::HYPERFINE_SPLITTING_MHZ)
}

pub fn initial_guess_with(spec: &Spectrum, ahf: f64) -> Result<HyperfineModel> {
    let n = spec.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("{n} points cannot define a dip")));
    }
    let half = 2;
    let smooth = moving_average(&spec.signal, half);
    let (i0, min) = smooth
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let depth = 1.0 - min;
    let mut sig = spec.sigma.clone();
    sig.sort_by(f64::total_cmp);
    let noise = sig[n / 2] / ((2 * half + 1) as f64).sqrt();
    if !(depth > 3.0 * noise) {
        return Err(Error::InsufficientData(format!("no dip above noise (depth {depth:e})")));
    }
    let level = 1.0 - 0.5 * depth;
    let crossing = |step: isize| -> Option<f64> {
        let mut i = i0 as isize;
        loop {
            let j = i + step;
            if j < 0 || j >= n as isize {
                return None;
            }
            let (a, b) = (i as usize, j as usize);
            if smooth[b] >= level {
                let t = (level - smooth[a]) / (smooth[b] - smooth[a]);
                let x = spec.freq_mhz[a] + t * (spec.freq_mhz[b] - spec.freq_mhz[a]);
                return Some((x - spec.freq_mhz[i0]).abs());
            }
            i = j;
        }
    };
    let (Some(left), Some(right)) = (crossing(-1), crossing(1)) else {
        return Err(Error::InsufficientData(
            "dip does not return to half depth inside the scan".into(),
        ));
    };
    let h = 0.5 * (left + right);

    // triplet_hwhm is non-decreasing in g and ≥ g, so the root lies in (0, h].
    let (mut lo, mut hi) = ((h * 1e-4).ln(), h.ln());
    if triplet_hwhm(lo.exp(), ahf) < h {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if triplet_hwhm(mid.exp(), ahf) < h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let g = (0.5 * (lo + hi)).exp();
    let amplitude = (depth / HyperfineModel::contrast_factor(g, ahf)).min(1.0 / 3.0);
    Ok(HyperfineModel {
        amplitude,
        center_hz: spec.freq_mhz[i0],
        hwhm_hz: g,
        splitting_hz: ahf,
    })
}

fn guess_or_neutral(spec: &Spectrum, ahf: f64) -> Result<HyperfineModel> {
    match initial_guess_with(spec, ahf) {
        Ok(m) => Ok(m),
        Err(Error::InsufficientData(_)) if spec.len() >= 5 => {
            let (a, b) = (spec.freq_mhz[0], spec.freq_mhz[spec.len() - 1]);
            Ok(HyperfineModel {
                amplitude: 0.0,
                center_hz: 0.5 * (a + b),
                hwhm_hz: (b - a) / 20.0,
                splitting_hz: ahf,
            })
        }
        Err(e) => Err(e),
    }
}

/// Fits amplitude, centre and component half width of the hyperfine triplet.
///
/// Side-resonance windows are placed once around the centre estimated from
/// the full scan, then the fit runs on the remaining points only.
pub fn fit_spectrum(spec: &Spectrum, ahf_hz: f64, exclusion: &ExclusionConfig) -> Result<FitReport> {
    fit_spectrum_with(spec, ahf_hz, exclusion, &LmOptions::default())
}

pub fn fit_spectrum_with(
    spec: &Spectrum,
    ahf_hz: f64,
    exclusion: &ExclusionConfig,
    opts: &LmOptions,
) -> Result<FitReport> {
    spec.validate()?;
    let first = guess_or_neutral(spec, ahf_hz)?;
    let windows = exclusion.windows(first.center_hz);
    let kept = spec.filtered(|f| !windows.iter().any(|(lo, hi)| f >= *lo && f <= *hi));
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points left after exclusion, need {MIN_FIT_POINTS}",
            kept.len()
        )));
    }
    let start = guess_or_neutral(&kept, ahf_hz)?;
    let init = [
        ParamSpec::free(PARAM_NAMES[0], start.amplitude),
        ParamSpec::free(PARAM_NAMES[1], start.center_hz),
        ParamSpec::positive(PARAM_NAMES[2], start.hwhm_hz),
    ];
    let model = TripletResiduals {
        spectrum: &kept,
        splitting_hz: ahf_hz,
    };
    let mut report = least_squares(&model, &init, opts)?;
    report.excluded_ranges = windows;
    Ok(report)
}

/// The fitted triplet described by a report from [`fit_spectrum`].
pub fn model_from_report(report: &FitReport, ahf_hz: f64) -> Option<HyperfineModel> {
    Some(HyperfineModel {
        amplitude: report.value(PARAM_NAMES[0])?,
        center_hz: report.value(PARAM_NAMES[1])?,
        hwhm_hz: report.value(PARAM_NAMES[2])?,
        splitting_hz: ahf_hz,
    })
}
