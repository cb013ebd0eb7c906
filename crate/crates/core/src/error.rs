use num_complex::Complex64;
use thiserror::Error;

use crate::special_functions::SingularityInfo;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the region where the requested quantity is defined
    /// (strip conditions, analyticity strips, parameter invariants).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tolerance not met: {message} (value {value}, err_est {err_est:.3e})")]
    Tolerance {
        message: String,
        value: Complex64,
        err_est: f64,
    },

    #[error("{context}: argument {z} is within {radius:.3e} of the pole lattice ({info})")]
    NearPole {
        z: Complex64,
        radius: f64,
        info: SingularityInfo,
        context: String,
    },

    #[error("non-finite integrand value at {0}")]
    NonFinite(String),

    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("singular coefficient: {0}")]
    SingularCoefficient(String),

    #[error("parameter error: {0}")]
    Parameter(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Rescale the partial value carried by a tolerance error, so that it stays
    /// comparable with what the successful path would have returned.
    pub fn scale_value(self, c: Complex64) -> Self {
        match self {
            Error::Tolerance { message, value, err_est } => Error::Tolerance {
                message,
                value: value * c,
                err_est: err_est * c.norm(),
            },
            other => other,
        }
    }

    /// Attach call-site context to a pole error; other variants pass through.
    pub(crate) fn with_context(self, ctx: impl FnOnce() -> String) -> Self {
        match self {
            Error::NearPole {
                z,
                radius,
                info,
                context,
            } => Error::NearPole {
                z,
                radius,
                info,
                context: format!("{}: {}", ctx(), context),
            },
            other => other,
        }
    }
}
