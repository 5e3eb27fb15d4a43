//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: symmetrization residual {residual:e} exceeds {limit:e}")]
    NonHermitian { residual: f64, limit: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:e}")]
    NotPSD { min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("program exceeds size budget: {dim} realified rows > budget {budget}")]
    SizeBudget { dim: usize, budget: usize },
    #[error("weight is not dyadic: {0}")]
    NotDyadic(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<V> = std::result::Result<V, Error>;
