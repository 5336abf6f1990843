use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the discovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing or non-numeric value at row {row}, column '{column}': {value:?}")]
    MissingValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("series too short: {0}")]
    TooShort(String),
    #[error("series '{0}' is constant (zero variance)")]
    ConstantSeries(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("k = {k} is too large for a cloud of {m} points")]
    KTooLarge { k: usize, m: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("driver and target are the same series ({0})")]
    SelfTest(usize),
    #[error("design matrix is rank deficient (column {0})")]
    RankDeficient(usize),
    #[error("graphs have different node counts ({estimated} vs {truth})")]
    NodeMismatch { estimated: usize, truth: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid structure spec: {0}")]
    InvalidSpec(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
