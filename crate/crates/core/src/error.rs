use thiserror::Error;

/// Errors raised by the model functions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the model.
    #[error("invalid input `{name}`: {reason}")]
    InvalidInput { name: &'static str, reason: String },

    /// A light-shift sum needs a J -> J' coupling that the line table lacks.
    #[error("line table has no coupling {0}")]
    MissingCoupling(String),

    /// Root bracketing failed.
    #[error("no sign change in bracket [{lo:e}, {hi:e}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// The ODE integrator could not make progress.
    #[error("integrator failed at t = {t:e}: {reason}")]
    Integration { t: f64, reason: String },

    /// A linear solve or fit did not produce a usable answer.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Line data could not be parsed or is inconsistent.
    #[error("line data: {0}")]
    LineData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidInput { name, reason: reason.into() }
}

pub(crate) fn ensure_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

pub(crate) fn ensure_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be non-negative and finite, got {v}")))
    }
}
