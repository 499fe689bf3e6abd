use thiserror::Error;

/// Errors raised by the library. Promise violations found by checks are
/// reported as data (see [`crate::problem::PromiseReport`]); the variants here
/// cover malformed inputs and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("non-finite entry in matrix")]
    NonFinite,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("Kraus set is incomplete (residual {residual:.3e})")]
    IncompleteKraus { residual: f64 },
    #[error("gate is not unitary: {0}")]
    NonUnitary(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("rule {rule} expects {expected}, got {found}")]
    KindMismatch {
        rule: String,
        expected: String,
        found: String,
    },
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
