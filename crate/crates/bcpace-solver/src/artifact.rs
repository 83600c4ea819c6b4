//! Versioned JSON serialization of trained estimates.

use std::fs;
use std::path::Path;

use core_bamdp::LatentMdpFamily;
use latent_qsolver::{LatentQTable, LipschitzProfile};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{BcpaceError, Result};
use crate::estimator::QEstimate;
use crate::index::SampleSet;
use crate::sample::Sample;

pub const ARTIFACT_FORMAT: &str = "bcpace-estimate";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<S> {
    pub format: String,
    pub version: u32,
    /// Model name as reported by the model.
    pub model: String,
    /// Caller-supplied environment parameters, stored verbatim.
    pub env: serde_json::Value,
    pub config: SolverConfig,
    pub profile: LipschitzProfile,
    pub latent_q: Option<LatentQTable>,
    pub samples: Vec<Sample<S>>,
}

impl<S: Clone + PartialEq> QEstimate<S> {
    pub fn to_artifact(&self, model_name: &str, env: serde_json::Value) -> Artifact<S> {
        Artifact {
            format: ARTIFACT_FORMAT.into(),
            version: ARTIFACT_VERSION,
            model: model_name.into(),
            env,
            config: self.config.clone(),
            profile: self.profile,
            latent_q: self.latent_q.clone(),
            samples: self.samples.samples().to_vec(),
        }
    }

    /// Rebuild a frozen estimate, keeping the stored profile and q-values.
    pub fn from_artifact<M: LatentMdpFamily<State = S>>(
        model: &M,
        artifact: Artifact<S>,
    ) -> Result<Self> {
        if artifact.model != model.name() {
            return Err(BcpaceError::ArtifactModelMismatch {
                found: artifact.model,
                expected: model.name().into(),
            });
        }
        artifact.config.validate()?;
        if artifact.config.needs_latent_table() && artifact.latent_q.is_none() {
            return Err(BcpaceError::MissingLatentTable);
        }
        if artifact.latent_q.as_ref().is_some_and(|t| !t.fits(model)) {
            return Err(BcpaceError::LatentTableMismatch);
        }
        let samples = SampleSet::from_samples(model, artifact.profile.alpha, artifact.samples);
        Ok(Self {
            config: artifact.config,
            profile: artifact.profile,
            latent_q: artifact.latent_q,
            samples,
        })
    }
}

pub fn save_artifact<S: Serialize>(path: &Path, artifact: &Artifact<S>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_vec(artifact)?)?;
    Ok(())
}

/// Load an artifact, rejecting other format versions before decoding the body.
pub fn load_artifact<S: DeserializeOwned>(path: &Path) -> Result<Artifact<S>> {
    let value: serde_json::Value = serde_json::from_slice(&fs::read(path)?)?;
    let found = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    let format = value
        .get("format")
        .and_then(|v| v.as_str())
        .unwrap_or_default();
    if found != ARTIFACT_VERSION || format != ARTIFACT_FORMAT {
        return Err(BcpaceError::ArtifactVersionMismatch {
            found,
            expected: ARTIFACT_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}
