//! Crate error type.

use thiserror::Error;

/// Errors produced by graph construction, queries, generation and discovery.
#[derive(Debug, Error)]
pub enum Error {
    /// A vertex id is outside the graph's `0..p` range.
    #[error("vertex {0} out of range (p = {1})")]
    VertexOutOfRange(u32, usize),

    /// Query sets that must be disjoint overlap, or an input violates a
    /// documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Random generation exhausted its resample budget.
    #[error("generation failed: {0}")]
    Generation(String),

    /// A numeric operation failed (singular matrix, non-finite value).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Selection filtering retained zero rows.
    #[error("degenerate selection: no rows satisfy the selection event")]
    DegenerateSelection,

    /// An orientation rule tried to overwrite a tail with an arrowhead or
    /// vice versa. This indicates unsound input (or a bug) and aborts the run.
    #[error("orientation contradiction on edge ({0},{1}) at {1}: {2}")]
    Contradiction(u32, u32, String),

    /// A text format could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
