use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("unknown environment `{0}` (expected tiger, chain or lightdark)")]
    UnknownEnvironment(String),

    #[error("invalid parameters for {env}: {reason}")]
    InvalidParams { env: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, EnvError>;

pub(crate) fn invalid(env: &'static str, reason: impl Into<String>) -> EnvError {
    EnvError::InvalidParams {
        env,
        reason: reason.into(),
    }
}
