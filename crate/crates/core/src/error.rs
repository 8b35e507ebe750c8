use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("non-numeric value {value:?} in numeric column {column:?} (line {line})")]
    NonNumeric {
        column: String,
        value: String,
        line: u64,
    },
    #[error("zero rows after dropping incomplete records")]
    ZeroRows,
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("invalid preprocessing config: {0}")]
    Preprocess(String),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid deletion scenario: {0}")]
    Scenario(String),
    #[error("cannot delete {count} of {n} records")]
    CountExceedsPopulation { count: usize, n: usize },
    #[error("invalid percentage grid: {0}")]
    Percentages(String),
    #[error("unknown row id {0}")]
    UnknownRowId(usize),
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length mismatch: y_true has {y_true}, y_pred has {y_pred}")]
    LengthMismatch { y_true: usize, y_pred: usize },
    #[error("label {label} outside class set of size {n_classes}")]
    UnknownLabel { label: usize, n_classes: usize },
    #[error("empty label vectors")]
    EmptyLabels,
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("series must not be empty")]
    EmptySeries,
    #[error("mismatched result grids: {0}")]
    GridMismatch(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
