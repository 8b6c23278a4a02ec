use thiserror::Error;

/// Errors raised by the simulation, filtration and pricing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("business-time horizon exceeded: required {required}, available {available}")]
    Horizon { required: f64, available: f64 },

    #[error("information violation: read of {what} at {at} beyond observable extent {limit}")]
    Information { what: &'static str, at: f64, limit: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("quadrature tail estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Truncation { estimate: f64, tolerance: f64 },

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
