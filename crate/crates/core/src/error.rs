use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not reach tolerance {tolerance:e} within {max_panels} panels (estimated error {estimate:e})")]
    QuadratureNonConvergence {
        tolerance: f64,
        max_panels: usize,
        estimate: f64,
    },

    #[error("objective is flat: maximum {max:e} below {threshold:e} over the whole search range")]
    FlatObjective { max: f64, threshold: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// True for failures of the numerical methods rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. } | Error::FlatObjective { .. }
        )
    }
}
