use core_bamdp::CoreError;
use latent_qsolver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle infeasible: {0}")]
    OracleInfeasible(String),

    #[error("invalid oracle settings: {0}")]
    InvalidSettings(String),

    #[error("oracle value iteration stopped after {iterations} sweeps with residual {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Latent(#[from] SolverError),
}

pub type Result<T> = std::result::Result<T, OracleError>;
