use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GeomcaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GeomcaError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input contains no points")]
    Empty,

    #[error("row {row} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {col}: value is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed GCPC file: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need n >= 2k: reference set has {n} points but k = {k} requires {required}")]
    TooFewForSample { n: usize, k: usize, required: usize },

    #[error("{set} set has {n} points; k = {k} needs at least {required}")]
    TooFewForNeighbors {
        set: &'static str,
        n: usize,
        k: usize,
        required: usize,
    },

    #[error(
        "edge count exceeded the cap of {cap}; lower epsilon, raise the sparsification delta, \
         or raise the cap"
    )]
    EdgeCapExceeded { cap: usize },

    #[error("{0} set is empty; precision and recall are undefined")]
    EmptySide(&'static str),
}

impl GeomcaError {
    /// True for errors caused by bad inputs or parameters rather than a
    /// failure during computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, GeomcaError::EdgeCapExceeded { .. })
    }
}
