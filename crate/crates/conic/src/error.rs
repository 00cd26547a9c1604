use thiserror::Error;

/// Errors raised while assembling a cone program.
///
/// Solver outcomes such as infeasibility are reported through
/// [`crate::Status`], not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
}
