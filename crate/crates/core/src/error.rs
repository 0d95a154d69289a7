//! Error types shared across the crate.

use thiserror::Error;

/// Failures of the dense linear-algebra kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: asymmetry {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("dimension error: {0}")]
    DimensionError(String),
    #[error("rank deficient: pivot norm {pivot:.3e} below threshold {threshold:.3e} at column {column}")]
    RankDeficient {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

/// Failures of the per-cell inner beamformer solve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerError {
    #[error("SLNR targets infeasible in cell {cell}: {reason}")]
    InfeasibleSlnr { cell: usize, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Configuration loading and validation failures.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },
    #[error("validation error on `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Export failures.
#[derive(Debug, Error)]
pub enum ExportError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported format `{0}` (expected csv or json)")]
    UnsupportedFormat(String),
}
