use serde::{Deserialize, Serialize};

use crate::chain::{ChainEnv, ChainParams};
use crate::error::{EnvError, Result};
use crate::lightdark::{LightDarkEnv, LightDarkParams};
use crate::tiger::{TigerEnv, TigerParams};

/// Environment name plus its parameters, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum EnvParams {
    Tiger(TigerParams),
    Chain(ChainParams),
    Lightdark(LightDarkParams),
}

impl EnvParams {
    /// Default parameters for a named environment.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "tiger" => Ok(Self::Tiger(TigerParams::default())),
            "chain" => Ok(Self::Chain(ChainParams::default())),
            "lightdark" => Ok(Self::Lightdark(LightDarkParams::default())),
            other => Err(EnvError::UnknownEnvironment(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Tiger(_) => "tiger",
            Self::Chain(_) => "chain",
            Self::Lightdark(_) => "lightdark",
        }
    }
}

/// A constructed benchmark model.
#[derive(Debug, Clone)]
pub enum Environment {
    Tiger(TigerEnv),
    Chain(ChainEnv),
    LightDark(LightDarkEnv),
}

/// Build a model, validating its parameters.
pub fn make_env(params: &EnvParams) -> Result<Environment> {
    Ok(match params {
        EnvParams::Tiger(p) => Environment::Tiger(TigerEnv::new(p.clone())?),
        EnvParams::Chain(p) => Environment::Chain(ChainEnv::new(p.clone())?),
        EnvParams::Lightdark(p) => Environment::LightDark(LightDarkEnv::new(p.clone())?),
    })
}

/// Run `$body` with `$model` bound to the concrete model inside an [`Environment`].
#[macro_export]
macro_rules! with_env {
    ($env:expr, $model:ident => $body:expr) => {
        match $env {
            $crate::Environment::Tiger($model) => $body,
            $crate::Environment::Chain($model) => $body,
            $crate::Environment::LightDark($model) => $body,
        }
    };
}
