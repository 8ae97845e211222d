use thiserror::Error;

pub type Result<T> = std::result::Result<T, FsrError>;

#[derive(Debug, Error)]
pub enum FsrError {
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("index set {0}")]
    InvalidIndexSet(String),

    #[error("screened set covers every column; no complement to generate pseudo-variables for")]
    EmptyComplement,

    #[error("null-model gradient is identically zero; no penalty path exists")]
    ZeroVarianceResponse,

    #[error("solver did not converge at lambda index {lambda_index} after {iterations} iterations")]
    NoConvergence { lambda_index: usize, iterations: usize },

    #[error("every observation is censored")]
    AllCensored,

    #[error("invalid response: {0}")]
    InvalidResponse(String),

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed CSV at row {row}, column '{column}': {message}")]
    MalformedCsv {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
