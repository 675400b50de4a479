//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by topology construction, compression, round engines,
/// data loading and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid compressor: {0}")]
    InvalidCompressor(String),

    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid hyper-parameter: {0}")]
    InvalidHyperParam(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
