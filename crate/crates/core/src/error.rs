use thiserror::Error;

/// Errors produced across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{field}: {reason}")]
    OutOfRange { field: String, reason: String },

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("empty input context (x={x}, z={z}) in count table")]
    EmptyContext { x: usize, z: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("missing entry: {0}")]
    Missing(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation error: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(field: &str, reason: impl Into<String>) -> Error {
    Error::OutOfRange {
        field: field.to_string(),
        reason: reason.into(),
    }
}
