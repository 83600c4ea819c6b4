use core_bamdp::CoreError;
use latent_qsolver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BcpaceError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("a latent Q-table is required when latent seeding or the best-case bound is enabled")]
    MissingLatentTable,

    #[error("latent Q-table does not match the model dimensions")]
    LatentTableMismatch,

    #[error("admissible k window [{lower:.3e}, {upper:.3e}] is empty")]
    EmptyKWindow { lower: f64, upper: f64 },

    #[error("stopping rule did not hold within {episodes} episodes")]
    BudgetExhausted { episodes: usize },

    #[error("artifact format version {found} is not supported (expected {expected})")]
    ArtifactVersionMismatch { found: u32, expected: u32 },

    #[error("artifact was trained on `{found}`, not `{expected}`")]
    ArtifactModelMismatch { found: String, expected: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Latent(#[from] SolverError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BcpaceError>;
