use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spectrum::{Spectrum, SpectrumMeta};
use crate::error::{Error, Result};
use crate::fitting::{GridRecord, MeasurementGrid};
use crate::lineshape::{total_width_model, ContrastModelParams, HyperfineModel, WidthModelParams};
use crate::numeric::lin_space;

/// Default frequency step of synthetic spectra (MHz).
pub const SYNTH_STEP_MHZ: f64 = 0.05;

/// σ written for noise-free synthetic spectra: small enough that any dip
/// counts as signal, while keeping the weights finite.
pub const NOISE_FREE_SIGMA: f64 = 1e-6;

/// Relative σ written for noise-free synthetic grids, so they stay fittable.
pub const NOMINAL_REL_SIGMA: f64 = 0.01;

/// Pair of NV–P1 side dips at ν0 ± δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideResonance {
    pub delta_mhz: f64,
    /// Depth of each side dip.
    pub contrast: f64,
    /// Half width of each side dip (MHz).
    pub hwhm_mhz: f64,
}

fn normal(sd: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sd).map_err(|e| Error::invalid("noise", e.to_string()))
}

/// Symmetric scan around the centre wide enough for the triplet and any
/// side dips, at [`SYNTH_STEP_MHZ`] spacing.
pub fn default_scan(truth: &HyperfineModel, side: Option<SideResonance>) -> Vec<f64> {
    let mut half = truth.required_half_span().max(60.0);
    if let Some(s) = side {
        half = half.max(s.delta_mhz + 25.0);
    }
    let n = (2.0 * half / SYNTH_STEP_MHZ).round() as usize + 1;
    lin_space(truth.center_hz - half, truth.center_hz + half, n)
}

/// Triplet spectrum with optional side dips and i.i.d. Gaussian noise of
/// standard deviation `noise_rel` (relative to the unit baseline).
///
/// With `noise_rel = 0` the exact model is returned and σ is set to
/// [`NOISE_FREE_SIGMA`].
pub fn synth_spectrum(
    truth: &HyperfineModel,
    side: Option<SideResonance>,
    noise_rel: f64,
    seed: u64,
    grid: Option<&[f64]>,
) -> Result<Spectrum> {
    if !(noise_rel.is_finite() && noise_rel >= 0.0) {
        return Err(Error::invalid("noise_rel", format!("must be >= 0, got {noise_rel}")));
    }
    if !(truth.amplitude >= 0.0 && truth.amplitude <= 1.0 / 3.0 && truth.hwhm_hz > 0.0) {
        return Err(Error::invalid("truth", "need 0 <= amplitude <= 1/3 and hwhm > 0"));
    }
    let freq = match grid {
        Some(g) => g.to_vec(),
        None => default_scan(truth, side),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal(noise_rel)?;
    let signal = freq
        .iter()
        .map(|&nu| {
            let mut s = truth.eval(nu);
            if let Some(sr) = side {
                let g2 = sr.hwhm_mhz * sr.hwhm_mhz;
                for c in [truth.center_hz - sr.delta_mhz, truth.center_hz + sr.delta_mhz] {
                    let x = nu - c;
                    s -= sr.contrast * g2 / (x * x + g2);
                }
            }
            if noise_rel > 0.0 {
                s += dist.sample(&mut rng);
            }
            s
        })
        .collect();
    let sigma = vec![if noise_rel > 0.0 { noise_rel } else { NOISE_FREE_SIGMA }; freq.len()];
    let mut meta = SpectrumMeta {
        sample_id: Some("synthetic".into()),
        delta_side_mhz: side.map(|s| s.delta_mhz),
        ..SpectrumMeta::default()
    };
    meta.extra.insert("seed".into(), seed.to_string());
    let spec = Spectrum {
        freq_mhz: freq,
        signal,
        sigma,
        meta,
    };
    spec.validate()?;
    Ok(spec)
}

/// Relative Gaussian noise applied to synthetic grid widths and amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNoise {
    pub width_rel: f64,
    pub amplitude_rel: f64,
}

impl GridNoise {
    pub fn none() -> Self {
        Self {
            width_rel: 0.0,
            amplitude_rel: 0.0,
        }
    }

    /// 2% on widths and 3% on amplitudes.
    pub fn reference() -> Self {
        Self {
            width_rel: 0.02,
            amplitude_rel: 0.03,
        }
    }
}

/// Forward-evaluates the width and contrast models on every (P, f_R) pair,
/// power-major, and perturbs the values.
///
/// Widths use entry i of `width.a_over_g2` for `powers[i]`. σ is the relative
/// noise times the model value (or [`NOMINAL_REL_SIGMA`] times it when the
/// noise is zero).
pub fn synth_grid(
    width: &WidthModelParams,
    contrast: &ContrastModelParams,
    powers: &[f64],
    rabis: &[f64],
    noise: GridNoise,
    seed: u64,
) -> Result<MeasurementGrid> {
    width.validate()?;
    if width.a_over_g2.len() != powers.len() {
        return Err(Error::invalid(
            "a_over_g2",
            format!("{} entries for {} powers", width.a_over_g2.len(), powers.len()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = normal(1.0)?;
    let rel = |r: f64| if r > 0.0 { r } else { NOMINAL_REL_SIGMA };
    let mut records = Vec::with_capacity(powers.len() * rabis.len());
    for (i, &p) in powers.iter().enumerate() {
        for &f in rabis {
            let w = total_width_model(width, p, i, f)?;
            let a = contrast.eval(p, f);
            let (ws, as_) = (rel(noise.width_rel) * w, rel(noise.amplitude_rel) * a);
            let (zw, za) = (unit.sample(&mut rng), unit.sample(&mut rng));
            records.push(GridRecord {
                power_mw: p,
                rabi_hz: f,
                width_hz: w + noise.width_rel * w * zw,
                width_sigma: ws,
                amplitude: a + noise.amplitude_rel * a * za,
                amplitude_sigma: as_,
            });
        }
    }
    let grid = MeasurementGrid::new(records);
    grid.validate()?;
    Ok(grid)
}
