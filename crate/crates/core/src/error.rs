use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the prototype-selection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: no data rows")]
    NoDataRows { path: PathBuf },

    #[error("{path}: line {line} has {found} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: line {line}, column '{column}': cannot parse '{value}' as a number")]
    ParseCell {
        path: PathBuf,
        line: usize,
        column: String,
        value: String,
    },

    #[error("{path}: line {line}, column '{column}': non-finite value")]
    NonFiniteCell { path: PathBuf, line: usize, column: String },

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("dataset has no label column")]
    MissingLabels,

    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("beta {beta} must strictly exceed the largest cost {max_cost}")]
    BetaTooSmall { beta: f64, max_cost: f64 },

    #[error("index {index} out of range for {len} source points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("index {0} is already selected")]
    AlreadySelected(usize),

    #[error("prototype set is empty")]
    EmptySet,

    #[error("weights do not lie on the simplex: {0}")]
    NotOnSimplex(String),

    #[error("invalid selection config: {0}")]
    InvalidConfig(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("unknown class '{0}'")]
    UnknownClass(String),

    #[error("infeasible target proportions: {0}")]
    InfeasibleProportions(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
