//! Training, frozen-policy evaluation and the benchmark matrix.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use baselines_oracle::{BeliefGridOracle, QmdpPolicy, TwoPhaseOracle};
use bcpace_solver::{
    load_artifact, run, save_artifact, Artifact, QEstimate, RunOutcome, SolverConfig,
};
use core_bamdp::{evaluate_policy, EpisodeReturn, EvalSettings, Exec, LatentMdpFamily, Policy};
use environments::{with_env, Environment};
use latent_qsolver::{solve_latent_q, CacheKey, LatentQTable, QCache};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::results::{episode_records, sort_rows, write_csv, EpisodeRecord, ResultRow};
use crate::spec::{ExperimentSpec, PolicyName};

/// Mixed into evaluation seeds so evaluation never replays training episodes.
const EVAL_SALT: u64 = 0x5eed_e7a1_0000_0000;

pub fn eval_seed(seed: u64) -> u64 {
    seed ^ EVAL_SALT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub environment: String,
    pub seed: u64,
    pub episodes: usize,
    pub samples: usize,
    pub terminated: bool,
    pub contraction_violations: usize,
    pub wall_seconds: f64,
    pub artifact: PathBuf,
    pub log: PathBuf,
}

/// Err with the seeds whose training hit `max_episodes`.
pub fn check_budget(summaries: &[TrainSummary]) -> Result<()> {
    let seeds: Vec<u64> = summaries
        .iter()
        .filter(|s| !s.terminated)
        .map(|s| s.seed)
        .collect();
    if seeds.is_empty() {
        Ok(())
    } else {
        Err(CliError::BudgetExhausted { seeds })
    }
}

/// Latent Q-table for the spec, read from or written to the output cache.
pub fn latent_table<M: LatentMdpFamily>(
    model: &M,
    spec: &ExperimentSpec,
    exec: Exec,
) -> Result<LatentQTable> {
    let settings = spec.latent_settings();
    let cache = QCache::new(spec.cache_dir());
    let key = CacheKey {
        env: spec.env_json().to_string(),
        gamma: settings.gamma,
        resolution: settings.resolution,
        tol: settings.tol,
    };
    if let Some(table) = cache.load(&key)?.filter(|t| t.fits(model)) {
        return Ok(table);
    }
    let table = solve_latent_q(model, settings, exec)?;
    cache.store(&key, &table)?;
    Ok(table)
}

/// Train one seed in memory without writing anything.
pub fn train_in_memory<M: LatentMdpFamily>(
    model: &M,
    spec: &ExperimentSpec,
    table: &LatentQTable,
    seed: u64,
    exec: Exec,
) -> Result<RunOutcome<M::State>> {
    let config = SolverConfig {
        seed,
        ..spec.solver.clone()
    };
    Ok(run(model, config, Some(table.clone()), exec)?)
}

fn train_seed<M: LatentMdpFamily>(
    model: &M,
    spec: &ExperimentSpec,
    table: &LatentQTable,
    seed: u64,
    exec: Exec,
) -> Result<TrainSummary> {
    let start = Instant::now();
    let outcome = train_in_memory(model, spec, table, seed, exec)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let summary = TrainSummary {
        environment: spec.label().into(),
        seed,
        episodes: outcome.episodes(),
        samples: outcome.estimate.len(),
        terminated: outcome.terminated,
        contraction_violations: outcome.log.contraction_violations,
        wall_seconds,
        artifact: spec.artifact_path(seed),
        log: spec.log_path(seed),
    };
    save_artifact(
        &summary.artifact,
        &outcome.estimate.to_artifact(model.name(), spec.env_json()),
    )?;
    outcome.log.write_csv(File::create(&summary.log)?)?;
    let summary_path = spec.seed_dir(seed).join("train_summary.json");
    fs::write(summary_path, serde_json::to_vec_pretty(&summary)?)?;
    Ok(summary)
}

/// Train every seed of the spec and write one artifact and log per seed.
///
/// Seeds whose budget ran out are still written; see [`check_budget`].
pub fn train(spec: &ExperimentSpec, exec: Exec) -> Result<Vec<TrainSummary>> {
    let env = spec.environment()?;
    with_env!(&env, model => {
        let table = latent_table(model, spec, exec)?;
        let seeds = &spec.eval.seeds;
        exec.map(seeds.len(), |i| train_seed(model, spec, &table, seeds[i], exec)).into_iter().collect()
    })
}

/// Load a frozen estimate, checking it was trained on the spec's environment.
pub fn load_estimate<M: LatentMdpFamily>(
    model: &M,
    spec: &ExperimentSpec,
    path: &Path,
) -> Result<QEstimate<M::State>> {
    let artifact: Artifact<M::State> = load_artifact(path)?;
    let mismatch = |reason: &str| CliError::ArtifactMismatch {
        path: path.display().to_string(),
        reason: reason.into(),
    };
    if artifact.env != spec.env_json() {
        return Err(mismatch("environment parameters differ"));
    }
    if artifact.config.gamma != spec.solver.gamma {
        return Err(mismatch("discount factor differs"));
    }
    Ok(QEstimate::from_artifact(model, artifact)?)
}

/// Which policies to evaluate and where the B-CPACE estimate comes from.
#[derive(Debug, Clone, Default)]
pub struct EvalRequest {
    pub policies: Vec<PolicyName>,
    /// Used for every seed instead of the per-seed artifact.
    pub artifact: Option<PathBuf>,
    /// Added to the B-CPACE wall time of the matching seed.
    pub train_seconds: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub rows: Vec<ResultRow>,
    pub episodes: Vec<EpisodeRecord>,
}

impl EvalReport {
    fn push(
        &mut self,
        label: &str,
        policy: PolicyName,
        seed: u64,
        returns: &[EpisodeReturn],
        samples: usize,
        wall: f64,
    ) {
        self.rows.push(ResultRow::from_returns(
            label,
            policy.as_str(),
            seed,
            returns,
            samples,
            wall,
        ));
        self.episodes
            .extend(episode_records(label, policy.as_str(), seed, returns));
    }

    fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
        self.episodes.extend(other.episodes);
    }

    fn finish(&mut self) {
        sort_rows(&mut self.rows);
        self.episodes.sort_by(|a, b| {
            (&a.environment, &a.policy, a.seed, a.episode).cmp(&(
                &b.environment,
                &b.policy,
                b.seed,
                b.episode,
            ))
        });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_csv(&dir.join("results.csv"), &self.rows)?;
        write_csv(&dir.join("episodes.csv"), &self.episodes)
    }
}

pub fn eval_settings(spec: &ExperimentSpec, seed: u64) -> EvalSettings {
    EvalSettings {
        episodes: spec.eval.episodes,
        horizon: spec.eval.horizon,
        gamma: spec.solver.gamma,
        seed: eval_seed(seed),
    }
}

fn timed<P: Policy<M> + ?Sized, M: LatentMdpFamily>(
    model: &M,
    policy: &P,
    settings: EvalSettings,
    exec: Exec,
) -> Result<(Vec<EpisodeReturn>, f64)> {
    let start = Instant::now();
    let returns = evaluate_policy(model, policy, settings, exec)?;
    Ok((returns, start.elapsed().as_secs_f64()))
}

/// Rollouts of the reference oracle: the belief-grid policy on discrete
/// models and the two-phase policy on Light-Dark.
fn oracle_returns(
    env: &Environment,
    spec: &ExperimentSpec,
    seed: u64,
    exec: Exec,
) -> Result<(Vec<EpisodeReturn>, f64)> {
    let settings = spec.oracle_settings();
    let eval = eval_settings(spec, seed);
    let start = Instant::now();
    let returns = match env {
        Environment::Tiger(model) => evaluate_policy(
            model,
            &BeliefGridOracle::solve(model, settings)?,
            eval,
            exec,
        )?,
        Environment::Chain(model) => evaluate_policy(
            model,
            &BeliefGridOracle::solve(model, settings)?,
            eval,
            exec,
        )?,
        Environment::LightDark(model) => {
            let oracle = TwoPhaseOracle::solve(model, latent_table(model, spec, exec)?, settings)?;
            evaluate_policy(model, &oracle, eval, exec)?
        }
    };
    Ok((returns, start.elapsed().as_secs_f64()))
}

fn eval_model<M: LatentMdpFamily>(
    model: &M,
    env: &Environment,
    spec: &ExperimentSpec,
    request: &EvalRequest,
    exec: Exec,
) -> Result<EvalReport> {
    let label = spec.label();
    let mut report = EvalReport::default();
    let needs_table = request.policies.contains(&PolicyName::Qmdp);
    let table = if needs_table {
        Some(latent_table(model, spec, exec)?)
    } else {
        None
    };
    for &seed in &spec.eval.seeds {
        for &policy in &request.policies {
            match policy {
                PolicyName::Bcpace => {
                    let path = request
                        .artifact
                        .clone()
                        .unwrap_or_else(|| spec.artifact_path(seed));
                    let estimate = load_estimate(model, spec, &path)?;
                    let (returns, wall) = timed(model, &estimate, eval_settings(spec, seed), exec)?;
                    let train = request
                        .train_seconds
                        .iter()
                        .find(|(s, _)| *s == seed)
                        .map_or(0.0, |(_, t)| *t);
                    report.push(label, policy, seed, &returns, estimate.len(), wall + train);
                }
                PolicyName::Qmdp => {
                    let qmdp = QmdpPolicy::new(table.as_ref().expect("table solved for qmdp"));
                    let (returns, wall) = timed(model, &qmdp, eval_settings(spec, seed), exec)?;
                    report.push(label, policy, seed, &returns, 0, wall);
                }
                PolicyName::Oracle => {
                    let (returns, wall) = oracle_returns(env, spec, seed, exec)?;
                    report.push(label, policy, seed, &returns, 0, wall);
                }
            }
        }
    }
    Ok(report)
}

/// Greedy rollouts of frozen policies; nothing is trained and no artifact is written.
pub fn eval(spec: &ExperimentSpec, request: &EvalRequest, exec: Exec) -> Result<EvalReport> {
    let env = spec.environment()?;
    let mut report = with_env!(&env, model => eval_model(model, &env, spec, request, exec))?;
    report.finish();
    Ok(report)
}

pub fn eval_dir(spec: &ExperimentSpec) -> PathBuf {
    spec.output.dir.join(spec.label()).join("eval")
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub eval: EvalReport,
    pub train: Vec<TrainSummary>,
}

/// Train and evaluate B-CPACE plus the listed baselines for every spec and seed.
pub fn bench(specs: &[ExperimentSpec], exec: Exec) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for spec in specs {
        let train = train(spec, exec)?;
        let mut policies = vec![PolicyName::Bcpace];
        policies.extend(spec.eval.baselines.iter().copied());
        let request = EvalRequest {
            policies,
            artifact: None,
            train_seconds: train.iter().map(|t| (t.seed, t.wall_seconds)).collect(),
        };
        report.eval.extend(eval(spec, &request, exec)?);
        report.train.extend(train);
    }
    report.eval.finish();
    Ok(report)
}
