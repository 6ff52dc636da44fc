use thiserror::Error;

/// Errors raised by fitting, prediction and evaluation.
#[derive(Debug, Error)]
pub enum LessError {
    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("requested {m} subsets but only {n} samples are available")]
    TooManySubsets { m: usize, n: usize },

    #[error("weighting parameter lambda must be non-negative, got {0}")]
    NegativeLambda(f64),

    #[error("explanations unavailable: {0}")]
    ExplanationsUnavailable(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("outer fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<LessError>,
    },

    #[error("model file: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, LessError>;
