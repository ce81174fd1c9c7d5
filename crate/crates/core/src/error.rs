use thiserror::Error;

use crate::expr::EvalError;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A user-supplied function returned NaN or an infinity.
    #[error("non-finite sample of {what} at {at}")]
    NonFinite { what: &'static str, at: f64 },

    /// The requested accuracy could not be reached within the configured budget.
    #[error("tolerance unreachable: {what} (estimate {estimate:e}, tolerance {tolerance:e})")]
    ToleranceUnreachable {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// An adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge: value {value}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    /// A user expression could not be evaluated.
    #[error("expression: {0}")]
    Expression(#[from] EvalError),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Returns `v` if it is finite, otherwise a [`Error::NonFinite`] tagged with `what` and `at`.
pub(crate) fn finite(v: f64, what: &'static str, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what, at })
    }
}
