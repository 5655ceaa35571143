use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two successive refinements of a quadrature disagree.
    #[error("{what} did not converge: {first:e} vs {second:e}")]
    NonConvergence {
        what: String,
        first: f64,
        second: f64,
    },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("resource cap exceeded: {what} needs {needed} bytes, cap is {cap} bytes")]
    ResourceCap { what: String, needed: u64, cap: u64 },

    /// An internal cross-check between two numerical routes failed.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
