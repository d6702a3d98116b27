use serde::{Deserialize, Serialize};

/// One fitted parameter in natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    /// 68% confidence half-width; infinite when the data do not constrain it.
    #[serde(with = "nonfinite")]
    pub ci68: f64,
}

/// Result of a least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: Vec<FitParam>,
    /// sqrt(χ²/n) of the weighted residuals.
    pub residual_rms: f64,
    pub chi_square: f64,
    pub n_points: usize,
    pub dof: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Frequency windows (MHz) dropped from the fit.
    #[serde(default)]
    pub excluded_ranges: Vec<(f64, f64)>,
    /// Parameters lying in the numerical null space of the Jacobian.
    #[serde(default)]
    pub unidentifiable: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }

    pub fn ci68(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.ci68)
    }

    /// (fitted − truth)/ci68.
    pub fn pull(&self, name: &str, truth: f64) -> Option<f64> {
        self.get(name).map(|p| (p.value - truth) / p.ci68)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }
}

/// Serialises non-finite floats as the strings "inf", "-inf" and "nan" so
/// JSON stays lossless.
pub(crate) mod nonfinite {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&crate::numeric::format_f64(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => crate::numeric::parse_f64(&t).ok_or_else(|| de::Error::custom(format!("bad float {t:?}"))),
        }
    }
}
