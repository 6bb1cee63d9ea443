//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("selection is incomplete; uncovered irreps: {uncovered:?}")]
    Incomplete { uncovered: Vec<String> },

    #[error("non-generic input: {0}")]
    NonGeneric(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("inversion failed: {0}")]
    InversionFailure(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
