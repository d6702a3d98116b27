use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use crate::fitting::ContrastTarget;
use crate::lineshape::P1RateForm;
use crate::numeric::{lin_space, log_space};
use crate::sensitivity::ContrastRelation;

/// A list of values given either explicitly (`0.1,0.5,1`) or as
/// `log:lo:hi:n` / `lin:lo:hi:n`. Config files may also use a plain array.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Axis(pub Vec<f64>);

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {t:?} in {s:?}"))
        };
        let values = if let Some(rest) = s.strip_prefix("log:").or_else(|| s.strip_prefix("lin:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(format!("expected <kind>:lo:hi:n, got {s:?}"));
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad count in {s:?}"))?;
            if s.starts_with("log:") {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(format!("log axis needs positive bounds: {s:?}"));
                }
                log_space(lo, hi, n)
            } else {
                lin_space(lo, hi, n)
            }
        } else {
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(num)
                .collect::<Result<_, _>>()?
        };
        if values.is_empty() {
            return Err(format!("empty axis {s:?}"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite value in {s:?}"));
        }
        Ok(Axis(values))
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            List(Vec<f64>),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::List(v) => Ok(Axis(v)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    TwoLevel,
    FiveLevelFluorescence,
    FiveLevelIr,
    /// Hyperfine triplet whose width and amplitude come from the fitted
    /// surrogate models.
    Hyperfine,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory.
    #[arg(long, default_value = "odmr-out")]
    pub out: PathBuf,
    /// TOML file whose values override the flags (a run manifest works).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Copies every `Some` field of `other` over `self`.
macro_rules! overlay {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl $t {
            pub fn overlay(mut self, other: Self) -> Self {
                $(if other.$f.is_some() { self.$f = other.$f; })*
                self
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Option<SimModel>,
    /// Light powers (mW).
    #[arg(long)]
    pub powers: Option<Axis>,
    /// Rabi frequencies (MHz).
    #[arg(long)]
    pub rabis: Option<Axis>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gaussian noise σ relative to the unit baseline.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Spin relaxation rate γ1 (1/µs).
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Transverse relaxation rate γ2 (1/µs).
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Pumping rate per mW of light, c (1/(µs·mW)).
    #[arg(long)]
    pub pump_per_mw: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long)]
    pub gamma_f: Option<f64>,
    #[arg(long)]
    pub gamma_s: Option<f64>,
    /// Depth of the side resonances added by the hyperfine model (0 = none).
    #[arg(long)]
    pub side_contrast: Option<f64>,
    #[arg(long)]
    pub delta_side_mhz: Option<f64>,
    #[arg(long)]
    pub side_hwhm_mhz: Option<f64>,
    /// Resonance centre written into the frequency column (MHz).
    #[arg(long)]
    pub center_mhz: Option<f64>,
    /// Points per spectrum for the spin models.
    #[arg(long)]
    pub points: Option<usize>,
}

overlay!(SimulateArgs {
    model,
    powers,
    rabis,
    seed,
    noise,
    gamma1,
    gamma2,
    pump_per_mw,
    theta,
    gamma0,
    gamma_f,
    gamma_s,
    side_contrast,
    delta_side_mhz,
    side_hwhm_mhz,
    center_mhz,
    points
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// Spectrum file, or a directory of spectrum files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Hyperfine splitting held fixed in the fit (MHz); 0 fits one Lorentzian.
    #[arg(long)]
    pub ahf_mhz: Option<f64>,
    /// Distance δ of the side resonances from the centre (MHz).
    #[arg(long)]
    pub exclude_side_mhz: Option<f64>,
    /// Width of each excluded window (MHz).
    #[arg(long)]
    pub exclude_width_mhz: Option<f64>,
    /// Disable side-resonance exclusion.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_exclusion: Option<bool>,
}

overlay!(FitArgs {
    input,
    ahf_mhz,
    exclude_side_mhz,
    exclude_width_mhz,
    no_exclusion
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P1FormArg {
    Squared,
    Linear,
}

impl From<P1FormArg> for P1RateForm {
    fn from(v: P1FormArg) -> Self {
        match v {
            P1FormArg::Squared => P1RateForm::Squared,
            P1FormArg::Linear => P1RateForm::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    Amplitude,
    Contrast,
}

impl From<TargetArg> for ContrastTarget {
    fn from(v: TargetArg) -> Self {
        match v {
            TargetArg::Amplitude => ContrastTarget::Amplitude,
            TargetArg::Contrast => ContrastTarget::Contrast,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalFitArgs {
    /// Measurement grid file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub p1_form: Option<P1FormArg>,
    #[arg(long, value_enum)]
    pub contrast_target: Option<TargetArg>,
    #[arg(long)]
    pub ahf_mhz: Option<f64>,
}

overlay!(GlobalFitArgs {
    input,
    p1_form,
    contrast_target,
    ahf_mhz
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationArg {
    Triple,
    Exact,
}

impl From<RelationArg> for ContrastRelation {
    fn from(v: RelationArg) -> Self {
        match v {
            RelationArg::Triple => ContrastRelation::Triple,
            RelationArg::Exact => ContrastRelation::Exact,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapArgs {
    #[arg(long)]
    pub powers: Option<Axis>,
    #[arg(long)]
    pub rabis: Option<Axis>,
    /// Factor applied to every photon rate.
    #[arg(long)]
    pub rate_boost: Option<f64>,
    #[arg(long, value_enum)]
    pub contrast_relation: Option<RelationArg>,
    /// Accepted for uniformity; the map is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

overlay!(MapArgs {
    powers,
    rabis,
    rate_boost,
    contrast_relation,
    seed
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthGridArgs {
    #[arg(long)]
    pub powers: Option<Axis>,
    #[arg(long)]
    pub rabis: Option<Axis>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative noise on widths.
    #[arg(long)]
    pub width_noise: Option<f64>,
    /// Relative noise on amplitudes.
    #[arg(long)]
    pub amplitude_noise: Option<f64>,
}

overlay!(SynthGridArgs {
    powers,
    rabis,
    seed,
    width_noise,
    amplitude_noise
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_forms() {
        assert_eq!("0.1, 0.5,1".parse::<Axis>().unwrap().0, vec![0.1, 0.5, 1.0]);
        let l: Axis = "log:0.02:500:12".parse().unwrap();
        assert_eq!(l.0.len(), 12);
        assert_eq!((l.0[0], l.0[11]), (0.02, 500.0));
        assert_eq!("lin:0:1:3".parse::<Axis>().unwrap().0, vec![0.0, 0.5, 1.0]);
        assert!("log:0:1:3".parse::<Axis>().is_err());
        assert!("".parse::<Axis>().is_err());
        assert!("1,x".parse::<Axis>().is_err());
    }

    #[test]
    fn overlay_prefers_later_values() {
        let flags = SynthGridArgs {
            seed: Some(1),
            width_noise: Some(0.1),
            ..Default::default()
        };
        let file = SynthGridArgs {
            seed: Some(7),
            ..Default::default()
        };
        let m = flags.overlay(file);
        assert_eq!(m.seed, Some(7));
        assert_eq!(m.width_noise, Some(0.1));
    }
}
