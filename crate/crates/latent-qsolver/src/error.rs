use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("discount {0} must lie strictly between 0 and 1")]
    InvalidDiscount(f64),

    #[error("invalid Lipschitz inputs: {0}")]
    InvalidProfile(String),

    #[error("invalid value-iteration settings: {0}")]
    InvalidSettings(String),

    #[error("value iteration stopped after {iterations} sweeps with residual {residual:e} above {tol:e}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("cache I/O failed: {0}")]
    Cache(#[from] std::io::Error),

    #[error("cache entry is malformed: {0}")]
    CacheFormat(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
