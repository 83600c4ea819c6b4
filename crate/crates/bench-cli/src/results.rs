//! Aggregate and per-episode result tables.

use std::fs;
use std::path::Path;

use core_bamdp::{mean_and_stderr, EpisodeReturn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const RESULT_HEADER: &str =
    "environment,policy,seed,episodes,mean,stderr,mean_discounted,stderr_discounted,samples,wall_seconds";
pub const EPISODE_HEADER: &str =
    "environment,policy,seed,episode,return_raw,return_discounted,steps";

/// Returns of one policy on one seed, on the native reward scale.
///
/// `mean` is the undiscounted episode total; `mean_discounted` discounts by the
/// solver's gamma. Standard errors are the sample stdev over `sqrt(episodes)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub environment: String,
    pub policy: String,
    pub seed: u64,
    pub episodes: usize,
    pub mean: f64,
    pub stderr: f64,
    pub mean_discounted: f64,
    pub stderr_discounted: f64,
    /// Stored samples of the evaluated estimate; 0 for baselines.
    pub samples: usize,
    pub wall_seconds: f64,
}

impl ResultRow {
    pub fn from_returns(
        environment: &str,
        policy: &str,
        seed: u64,
        returns: &[EpisodeReturn],
        samples: usize,
        wall_seconds: f64,
    ) -> Self {
        let raw: Vec<f64> = returns.iter().map(|r| r.raw).collect();
        let discounted: Vec<f64> = returns.iter().map(|r| r.raw_discounted).collect();
        let (mean, stderr) = mean_and_stderr(&raw);
        let (mean_discounted, stderr_discounted) = mean_and_stderr(&discounted);
        Self {
            environment: environment.into(),
            policy: policy.into(),
            seed,
            episodes: returns.len(),
            mean,
            stderr,
            mean_discounted,
            stderr_discounted,
            samples,
            wall_seconds,
        }
    }

    fn key(&self) -> (&str, &str, u64) {
        (&self.environment, &self.policy, self.seed)
    }
}

/// Rows keyed by environment, policy and seed.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub environment: String,
    pub policy: String,
    pub seed: u64,
    pub episode: usize,
    pub return_raw: f64,
    pub return_discounted: f64,
    pub steps: usize,
}

pub fn episode_records(
    environment: &str,
    policy: &str,
    seed: u64,
    returns: &[EpisodeReturn],
) -> Vec<EpisodeRecord> {
    returns
        .iter()
        .enumerate()
        .map(|(episode, r)| EpisodeRecord {
            environment: environment.into(),
            policy: policy.into(),
            seed,
            episode,
            return_raw: r.raw,
            return_discounted: r.raw_discounted,
            steps: r.steps,
        })
        .collect()
}

/// Write rows with a header line, creating parent directories.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = csv::Writer::from_path(path)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}
