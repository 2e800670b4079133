use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("zero field cannot be normalized")]
    ZeroField,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
