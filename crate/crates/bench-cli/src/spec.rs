//! Versioned experiment specification, read from TOML.
//!
//! ```toml
//! version = 1
//! label = "tiger"            # optional; defaults to the environment name
//!
//! [env]
//! name = "tiger"             # tiger | chain | lightdark, plus its parameters
//! renewal = true
//!
//! [solver]                   # B-CPACE settings; omitted keys take defaults
//! k = 50
//!
//! [latent]                   # latent value iteration; gamma follows [solver]
//! [oracle]                   # belief-grid / two-phase oracle; gamma follows [solver]
//!
//! [eval]
//! episodes = 1000
//! horizon = 100
//! baselines = ["qmdp"]       # qmdp | oracle
//! seeds = [0]
//!
//! [diag]
//! rollouts = 50
//! trials = 10000
//!
//! [output]
//! dir = "runs"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use baselines_oracle::OracleSettings;
use bcpace_solver::SolverConfig;
use environments::{make_env, EnvParams, Environment};
use latent_qsolver::LatentSolveSettings;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Bcpace,
    Qmdp,
    Oracle,
}

impl PolicyName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bcpace => "bcpace",
            Self::Qmdp => "qmdp",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSpec {
    pub episodes: usize,
    pub horizon: usize,
    pub baselines: Vec<PolicyName>,
    pub seeds: Vec<u64>,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            episodes: 1000,
            horizon: 100,
            baselines: vec![PolicyName::Qmdp],
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagSpec {
    /// Greedy rollouts traced for the packing estimate.
    pub rollouts: usize,
    /// Random trials per property check.
    pub trials: usize,
}

impl Default for DiagSpec {
    fn default() -> Self {
        Self {
            rollouts: 50,
            trials: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    #[serde(default)]
    pub label: Option<String>,
    pub env: EnvParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub latent: Option<LatentSolveSettings>,
    #[serde(default)]
    pub oracle: Option<OracleSettings>,
    #[serde(default)]
    pub eval: EvalSpec,
    #[serde(default)]
    pub diag: DiagSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentSpec {
    /// Spec with default settings for one environment.
    pub fn new(env: EnvParams) -> Self {
        Self {
            version: SPEC_VERSION,
            label: None,
            env,
            solver: SolverConfig::default(),
            latent: None,
            oracle: None,
            eval: EvalSpec::default(),
            diag: DiagSpec::default(),
            output: OutputSpec::default(),
        }
    }

    /// Parse and validate. The version is checked before the body is decoded.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        match value.get("version").and_then(toml::Value::as_integer) {
            Some(v) if v == SPEC_VERSION as i64 => {}
            Some(v) => {
                return Err(CliError::Config(format!(
                    "spec version {v} is not supported (expected {SPEC_VERSION})"
                )))
            }
            None => return Err(CliError::Config("missing integer `version`".into())),
        }
        let spec: Self = value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.version != SPEC_VERSION {
            return bad(format!("spec version {} is not supported", self.version));
        }
        if self.eval.seeds.is_empty() {
            return bad("eval.seeds must list at least one seed".into());
        }
        if self.eval.episodes == 0 || self.eval.horizon == 0 {
            return bad("eval.episodes and eval.horizon must be at least 1".into());
        }
        if self.eval.baselines.contains(&PolicyName::Bcpace) {
            return bad("bcpace is always evaluated and cannot be listed as a baseline".into());
        }
        if self.diag.trials == 0 {
            return bad("diag.trials must be at least 1".into());
        }
        self.solver.validate()?;
        let gamma = self.solver.gamma;
        if self.latent.is_some_and(|l| l.gamma != gamma) {
            return bad("latent.gamma must equal solver.gamma".into());
        }
        if self.oracle.is_some_and(|o| o.gamma != gamma) {
            return bad("oracle.gamma must equal solver.gamma".into());
        }
        make_env(&self.env)?;
        Ok(())
    }

    /// Name used for output directories and result rows.
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.env.name())
    }

    pub fn latent_settings(&self) -> LatentSolveSettings {
        let base = self.latent.unwrap_or_default();
        LatentSolveSettings {
            gamma: self.solver.gamma,
            ..base
        }
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        let base = self.oracle.unwrap_or_default();
        OracleSettings {
            gamma: self.solver.gamma,
            ..base
        }
    }

    pub fn environment(&self) -> Result<Environment> {
        Ok(make_env(&self.env)?)
    }

    pub fn env_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.env).expect("environment parameters serialize")
    }

    /// Apply command-line overrides: a single seed and an output directory.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        if let Some(seed) = seed {
            self.eval.seeds = vec![seed];
        }
        if let Some(dir) = out {
            self.output.dir = dir;
        }
        self
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.output
            .dir
            .join(self.label())
            .join(format!("seed-{seed}"))
    }

    pub fn artifact_path(&self, seed: u64) -> PathBuf {
        self.seed_dir(seed).join("estimate.json")
    }

    pub fn log_path(&self, seed: u64) -> PathBuf {
        self.seed_dir(seed).join("training_log.csv")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.output.dir.join("cache")
    }
}
