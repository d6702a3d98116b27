use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The steady-state linear system has no unique solution.
    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence after {iterations} iterations (cost {cost:e})")]
    NoConvergence { iterations: usize, cost: f64 },

    /// Jacobian is rank deficient at the optimum; lists the parameters
    /// spanning the null space.
    #[error("singular jacobian; unidentifiable parameters: {}", params.join(", "))]
    SingularJacobian { params: Vec<String> },

    #[error("unidentifiable parameters: {}", params.join(", "))]
    UnidentifiableParameter { params: Vec<String> },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSystem(_)
                | Error::NoConvergence { .. }
                | Error::SingularJacobian { .. }
                | Error::UnidentifiableParameter { .. }
        )
    }
}

pub(crate) fn ensure_finite_nonneg(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

pub(crate) fn ensure_positive(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
    }
    Ok(())
}
