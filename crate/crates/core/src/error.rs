use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model produced a non-finite value ({what}); scenario is invalid")]
    NonFinite { what: &'static str },

    #[error("sensor coincides with the source; log-distance model is singular")]
    SensorAtSource,

    #[error("finite-difference stencil crosses the upwind boundary x = {boundary}")]
    StencilCrossesBoundary { boundary: f64 },

    #[error("information matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("matrix trace is negative ({0})")]
    NegativeTrace(f64),

    #[error("initialization found only {found} of {needed} plausible samples in {budget} draws")]
    InitializationFailed {
        found: usize,
        needed: usize,
        budget: usize,
    },

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
