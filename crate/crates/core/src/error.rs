use thiserror::Error;

/// Errors produced by dataset ingestion, tree fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing value in column `{column}`, row {row}")]
    MissingValue { row: usize, column: String },

    #[error("outcome out of domain, row {row}: expected 0 or 1, found `{value}`")]
    OutcomeDomain { row: usize, value: String },

    #[error("treatment out of domain, row {row}: `{value}` is not one of the declared labels")]
    TreatmentDomain { row: usize, value: String },

    #[error("unparseable numeric value `{value}` in column `{column}`, row {row}")]
    Numeric { row: usize, column: String, value: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "insufficient representation of both treatments: n_A={n_a}, n_B={n_b}, need at least {min_bucket} per arm"
    )]
    InsufficientArms { n_a: u64, n_b: u64, min_bucket: u64 },

    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
