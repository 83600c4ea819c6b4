use thiserror::Error;

/// Errors raised by belief construction and the Bayes estimator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("belief has {got} entries but the model has {expected} latents")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("latent index {index} out of range for {count} latents")]
    LatentOutOfRange { index: usize, count: usize },

    #[error("action {action} out of range for {count} actions")]
    ActionOutOfRange { action: usize, count: usize },

    #[error("observed transition has zero likelihood under every supported latent")]
    ImpossibleTransition,
}

pub type Result<T> = std::result::Result<T, CoreError>;
