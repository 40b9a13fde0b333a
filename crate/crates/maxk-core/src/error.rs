//! Crate-wide error type.

use std::io;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input file; `line` is 1-based where applicable (0 for headers
    /// of binary formats).
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// Binary input ended before the declared payload.
    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("{what} index {index} out of bounds ({bound})")]
    Bounds {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Sparsity pattern of a gradient does not match the forward selection.
    #[error("pattern mismatch: {0}")]
    Pattern(String),

    /// Edge-group plan does not cover the graph it is applied to.
    #[error("plan mismatch: {0}")]
    Plan(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Operation called before its prerequisite (e.g. backward before forward).
    #[error("invalid state: {0}")]
    State(String),

    #[error("training diverged: {0}")]
    Divergence(String),
}

impl Error {
    pub fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
