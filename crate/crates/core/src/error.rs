use thiserror::Error;

/// Errors for distribution, operator, and protocol operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {expected} vs {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("invalid bit subset: {0}")]
    InvalidSubset(String),

    #[error("exact-mode capacity exceeded: {detail} (cap: {cap})")]
    Capacity { detail: String, cap: String },

    #[error("infeasible construction: {detail} (maximum achievable spike: {max_spike})")]
    Infeasible { detail: String, max_spike: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
