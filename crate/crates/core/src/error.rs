use std::io;

use thiserror::Error;

pub type Result<T, E = RbmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RbmError {
    #[error("shape mismatch: {what} expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("exact enumeration over {units} units exceeds the cap of {cap}; use AIS instead")]
    IntractableSize { units: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RbmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RbmError::InvalidArgument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        RbmError::Format(msg.into())
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(RbmError::Shape { what, expected, actual })
    }
}
