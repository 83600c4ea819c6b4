use baselines_oracle::OracleError;
use bcpace_solver::BcpaceError;
use core_bamdp::CoreError;
use environments::EnvError;
use latent_qsolver::SolverError;
use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_ARTIFACT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("artifact {path} does not match the experiment: {reason}")]
    ArtifactMismatch { path: String, reason: String },

    #[error("training budget exhausted for seeds {seeds:?}")]
    BudgetExhausted { seeds: Vec<u64> },

    #[error(transparent)]
    Solver(#[from] BcpaceError),

    #[error(transparent)]
    Oracle(#[from] OracleError),

    #[error(transparent)]
    Latent(#[from] SolverError),

    #[error(transparent)]
    Env(#[from] EnvError),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 config, 3 budget exhausted, 4 artifact mismatch, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Env(_) => EXIT_CONFIG,
            Self::Solver(BcpaceError::InvalidConfig(_) | BcpaceError::EmptyKWindow { .. }) => {
                EXIT_CONFIG
            }
            Self::Oracle(OracleError::InvalidSettings(_)) => EXIT_CONFIG,
            Self::Latent(
                SolverError::InvalidSettings(_)
                | SolverError::InvalidDiscount(_)
                | SolverError::InvalidProfile(_),
            ) => EXIT_CONFIG,
            Self::BudgetExhausted { .. } | Self::Solver(BcpaceError::BudgetExhausted { .. }) => {
                EXIT_BUDGET
            }
            Self::ArtifactMismatch { .. }
            | Self::Solver(
                BcpaceError::ArtifactVersionMismatch { .. }
                | BcpaceError::ArtifactModelMismatch { .. }
                | BcpaceError::LatentTableMismatch,
            ) => EXIT_ARTIFACT,
            _ => EXIT_FAILURE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
