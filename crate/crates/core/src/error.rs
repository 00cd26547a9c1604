use thiserror::Error;

/// Errors raised across the tomography pipeline.
#[derive(Debug, Error)]
pub enum QmtError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ensemble is not informationally complete (rank {rank}, need {needed})")]
    NotInformationallyComplete { rank: usize, needed: usize },
    #[error("random generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("unknown state label `{0}`")]
    UnknownLabel(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QmtError>;
