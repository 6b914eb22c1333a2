use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("unknown point id `{0}`")]
    UnknownPoint(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
