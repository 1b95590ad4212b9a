use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling budget exhausted after {attempts} resamples (min separation {min_sep} too large?)")]
    SamplingBudgetExhausted { attempts: usize, min_sep: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ill-conditioned sensing: KKT system is not positive definite")]
    IllConditionedSensing,

    #[error("eigendecomposition failed")]
    Eigendecomposition,

    #[error("toeplitz matrix has full rank {0}; vandermonde decomposition is not unique")]
    FullRank(usize),

    #[error("toeplitz matrix has negative eigenvalue {value:e} beyond tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("atom basis is ill-conditioned (condition number {0:e})")]
    IllConditionedAtoms(f64),

    #[error("instance too large for the grid oracle: {0}")]
    BudgetExceeded(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
