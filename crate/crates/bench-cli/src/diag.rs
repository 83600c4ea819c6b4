//! Cover estimates, the sample-complexity bound and randomized property checks.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use bcpace_solver::{
    cover_report, estimator_lipschitz_check, sample_complexity_bound, traced_tuples,
    ComplexityBound, CoverReport,
};
use core_bamdp::checks::{belief_contraction, simplex_closure, vertex_absorption, CheckReport};
use core_bamdp::{Exec, LatentMdpFamily};
use environments::with_env;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{latent_table, load_estimate, train_in_memory};
use crate::error::Result;
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRate {
    pub trials: usize,
    pub violations: usize,
    pub rate: f64,
    pub worst: f64,
}

impl From<CheckReport> for CheckRate {
    fn from(r: CheckReport) -> Self {
        Self {
            trials: r.trials,
            violations: r.violations,
            rate: r.rate(),
            worst: r.worst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagReport {
    pub environment: String,
    pub seed: u64,
    pub samples: usize,
    pub k: usize,
    pub l_q_tilde: f64,
    /// Packing of traced tuples at the known radius, full and reduced.
    pub cover: CoverReport,
    /// `samples <= k * cover.full`.
    pub samples_within_cover: bool,
    /// Bound evaluated with the full packing size as the cover number.
    pub bound: ComplexityBound,
    pub simplex_closure: CheckRate,
    pub vertex_absorption: CheckRate,
    pub belief_contraction: CheckRate,
    pub estimator_lipschitz: CheckRate,
    /// Sweeps that failed to contract by gamma; known only when trained here.
    pub training_contraction_violations: Option<usize>,
}

fn diag_seed<M: LatentMdpFamily>(
    model: &M,
    spec: &ExperimentSpec,
    artifact: Option<&Path>,
    seed: u64,
    exec: Exec,
) -> Result<DiagReport> {
    let stored = artifact
        .map(Path::to_path_buf)
        .unwrap_or_else(|| spec.artifact_path(seed));
    let (estimate, violations) = if artifact.is_some() || stored.exists() {
        (load_estimate(model, spec, &stored)?, None)
    } else {
        let table = latent_table(model, spec, exec)?;
        let outcome = train_in_memory(model, spec, &table, seed, exec)?;
        (outcome.estimate, Some(outcome.log.contraction_violations))
    };
    let points = traced_tuples(model, &estimate, spec.diag.rollouts, seed)?;
    let cover = cover_report(model, &estimate, &points, estimate.known_radius());
    let bound = sample_complexity_bound(estimate.profile(), estimate.config(), cover.full as f64);

    let mut seen = HashSet::new();
    let states: Vec<M::State> = points
        .iter()
        .map(|(s, _, _)| s.clone())
        .filter(|s| seen.insert(s.clone()))
        .collect();
    let trials = spec.diag.trials;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(DiagReport {
        environment: spec.label().into(),
        seed,
        samples: estimate.len(),
        k: estimate.config().k,
        l_q_tilde: estimate.profile().l_q_tilde,
        cover,
        samples_within_cover: estimate.len() <= estimate.config().k * cover.full,
        bound,
        simplex_closure: simplex_closure(model, &states, trials, &mut rng).into(),
        vertex_absorption: vertex_absorption(model, &states, trials, &mut rng).into(),
        belief_contraction: belief_contraction(model, &states, trials, &mut rng).into(),
        estimator_lipschitz: estimator_lipschitz_check(model, &estimate, &states, trials, &mut rng)
            .into(),
        training_contraction_violations: violations,
    })
}

/// One report per seed, each also written to `diag.json` in the seed directory.
///
/// Uses `artifact` for every seed when given, else the seed's stored artifact,
/// else a fresh in-memory training run.
pub fn diag(spec: &ExperimentSpec, artifact: Option<&Path>, exec: Exec) -> Result<Vec<DiagReport>> {
    let env = spec.environment()?;
    let mut reports = Vec::new();
    for &seed in &spec.eval.seeds {
        let report = with_env!(&env, model => diag_seed(model, spec, artifact, seed, exec))?;
        let dir = spec.seed_dir(seed);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("diag.json"), serde_json::to_vec_pretty(&report)?)?;
        reports.push(report);
    }
    Ok(reports)
}
