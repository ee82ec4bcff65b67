use std::io;

use thiserror::Error;

/// Errors raised anywhere in the reconciliation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A d-dimensional block has zero norm, so it has no inverse.
    #[error("degenerate block {block}: zero norm")]
    DegenerateBlock { block: usize },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Malformed alist input. `line` is 1-based.
    #[error("alist parse error at line {line}: {reason}")]
    Alist { line: usize, reason: String },

    #[error("code construction failed: {0}")]
    Construction(String),

    /// One-time-pad material is missing or was already used.
    #[error("key material: {0}")]
    KeyMaterial(String),

    #[error("wire protocol: {0}")]
    Wire(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        })
    }
}
