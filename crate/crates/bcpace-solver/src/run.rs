//! The exploration loop: greedy rollouts, sample collection and value iteration.

use std::io::Write;

use core_bamdp::{
    belief_reward, belief_update, episode_rng, Belief, EpisodeReturn, Exec, LatentMdpFamily,
    LatentVar,
};
use latent_qsolver::{argmax, LatentQTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{BcpaceError, Result};
use crate::estimator::QEstimate;
use crate::fixed_point::FixedPointReport;
use crate::sample::Sample;

/// One training episode as streamed to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub return_raw: f64,
    pub return_shifted: f64,
    /// Sample count after the episode was merged.
    pub samples: usize,
    /// Value-iteration sweeps run on account of this episode.
    pub vi_iters: usize,
    /// Whether the rollout reached a tuple outside the known set.
    pub escaped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub rows: Vec<EpisodeRow>,
    pub fixed_point_calls: usize,
    pub sweeps: usize,
    /// Sweeps whose change exceeded `gamma` times the previous change.
    pub contraction_violations: usize,
    pub last_vi_converged: bool,
}

impl TrainingLog {
    fn record_fixed_point(&mut self, report: &FixedPointReport, gamma: f64) {
        self.fixed_point_calls += 1;
        self.sweeps += report.iterations;
        self.contraction_violations += report.contraction_violations(gamma);
        self.last_vi_converged = report.converged;
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<EpisodeRow>> {
        csv::Reader::from_reader(reader)
            .deserialize()
            .map(|r| r.map_err(BcpaceError::from))
            .collect()
    }

    pub fn final_samples(&self) -> usize {
        self.rows.last().map_or(0, |r| r.samples)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<S> {
    pub estimate: QEstimate<S>,
    pub log: TrainingLog,
    /// False when `max_episodes` ran out before the stopping rule held.
    pub terminated: bool,
}

impl<S> RunOutcome<S> {
    pub fn episodes(&self) -> usize {
        self.log.rows.len()
    }

    /// Err when training stopped on `max_episodes` rather than the stopping rule.
    pub fn check_budget(&self) -> Result<()> {
        if self.terminated {
            Ok(())
        } else {
            Err(BcpaceError::BudgetExhausted {
                episodes: self.episodes(),
            })
        }
    }
}

/// A rollout of the greedy policy against the true hidden latent.
struct Walker<S> {
    state: S,
    latent: LatentVar,
    belief: Belief,
    t: usize,
    discount: f64,
    returns: EpisodeReturn,
    escaped: bool,
    rng: ChaCha8Rng,
}

impl<S: Clone + PartialEq + Eq + std::hash::Hash + Send + Sync> Walker<S> {
    fn new<M: LatentMdpFamily<State = S>>(model: &M, seed: u64, episode: usize) -> Self {
        let mut rng = episode_rng(seed, episode as u64);
        let start = model.sample_initial(&mut rng);
        Self {
            state: start.state,
            latent: start.latent,
            belief: model.prior().clone(),
            t: 0,
            discount: 1.0,
            returns: EpisodeReturn::default(),
            escaped: false,
            rng,
        }
    }

    fn finished<M: LatentMdpFamily<State = S>>(&self, model: &M, horizon: usize) -> bool {
        self.t >= horizon || model.is_terminal(&self.state)
    }

    /// Take one greedy step; returns the visited tuple as a sample when it was not known.
    fn step<M: LatentMdpFamily<State = S>>(
        &mut self,
        model: &M,
        qe: &QEstimate<S>,
        pending: &[Sample<S>],
    ) -> Result<Option<Sample<S>>> {
        let (state, belief) = (&self.state, &self.belief);
        let action = argmax(&qe.action_values_with(model, state, belief, pending));
        let known = qe.is_known_with(model, state, belief, action, pending);
        let next = model.sample_next(state, self.latent, action, &mut self.rng);
        let reward = model.transition_reward(state, self.latent, action, &next);
        let next_belief = belief_update(model, belief, state, action, &next)?;
        if model.redraws_latent(state, action) {
            self.latent = model.prior().sample_with(self.rng.random::<f64>());
        }
        let shift = model.reward_shift();
        self.returns.shifted += reward;
        self.returns.raw += reward - shift;
        self.returns.raw_discounted += self.discount * (reward - shift);
        self.returns.steps += 1;
        self.discount *= qe.config.gamma;
        self.t += 1;
        let sample = (!known).then(|| Sample {
            state: state.clone(),
            belief: belief.clone(),
            action,
            reward: belief_reward(model, state, belief, action),
            next_state: next.clone(),
            next_belief: next_belief.clone(),
            q_value: qe.q_tilde_max(),
        });
        self.escaped |= sample.is_some();
        self.state = next;
        self.belief = next_belief;
        Ok(sample)
    }
}

fn row(
    episode: usize,
    returns: &EpisodeReturn,
    samples: usize,
    vi_iters: usize,
    escaped: bool,
) -> EpisodeRow {
    EpisodeRow {
        episode,
        return_raw: returns.raw,
        return_shifted: returns.shifted,
        samples,
        vi_iters,
        escaped,
    }
}

/// Train an estimate from scratch.
///
/// With `n_batch == 1` value iteration runs after every added sample. Larger
/// batches roll out `n_batch` episodes against a frozen estimate (each also
/// seeing its own new samples), merge their samples in (episode, step) order
/// while re-checking knownness, then run value iteration once.
pub fn run<M: LatentMdpFamily>(
    model: &M,
    config: SolverConfig,
    latent_q: Option<LatentQTable>,
    exec: Exec,
) -> Result<RunOutcome<M::State>> {
    let qe = QEstimate::new(model, config, latent_q)?;
    train(model, qe, exec)
}

fn train<M: LatentMdpFamily>(
    model: &M,
    mut qe: QEstimate<M::State>,
    exec: Exec,
) -> Result<RunOutcome<M::State>> {
    let config = qe.config.clone();
    let mut log = TrainingLog {
        last_vi_converged: true,
        ..Default::default()
    };
    let mut quiet = 0usize;
    let mut episode = 0usize;
    let mut terminated = false;
    while episode < config.max_episodes {
        let batch = config.n_batch.min(config.max_episodes - episode);
        if config.n_batch == 1 {
            let mut walker = Walker::new(model, config.seed, episode);
            let mut vi_iters = 0;
            let mut added = 0;
            while !walker.finished(model, config.horizon) {
                if let Some(sample) = walker.step(model, &qe, &[])? {
                    qe.add_sample(model, sample);
                    added += 1;
                    let report = qe.fixed_point(model, exec);
                    vi_iters += report.iterations;
                    log.record_fixed_point(&report, config.gamma);
                }
            }
            if !log.last_vi_converged {
                let report = qe.fixed_point(model, exec);
                vi_iters += report.iterations;
                log.record_fixed_point(&report, config.gamma);
            }
            log.rows.push(row(
                episode,
                &walker.returns,
                qe.len(),
                vi_iters,
                walker.escaped,
            ));
            quiet = if added == 0 { quiet + 1 } else { 0 };
        } else {
            let traces: Vec<Result<(EpisodeReturn, bool, Vec<Sample<M::State>>)>> =
                exec.map(batch, |j| {
                    let mut walker = Walker::new(model, config.seed, episode + j);
                    let mut pending = Vec::new();
                    while !walker.finished(model, config.horizon) {
                        if let Some(sample) = walker.step(model, &qe, &pending)? {
                            pending.push(sample);
                        }
                    }
                    Ok((walker.returns, walker.escaped, pending))
                });
            let mut rows = Vec::with_capacity(batch);
            let mut batch_added = 0;
            for (j, trace) in traces.into_iter().enumerate() {
                let (returns, escaped, pending) = trace?;
                let mut added = 0;
                for sample in pending {
                    if !qe.is_known(model, &sample.state, &sample.belief, sample.action) {
                        qe.add_sample(model, sample);
                        added += 1;
                    }
                }
                batch_added += added;
                quiet = if added == 0 { quiet + 1 } else { 0 };
                rows.push(row(episode + j, &returns, qe.len(), 0, escaped));
            }
            if batch_added > 0 || !log.last_vi_converged {
                let report = qe.fixed_point(model, exec);
                log.record_fixed_point(&report, config.gamma);
                if let Some(last) = rows.last_mut() {
                    last.vi_iters = report.iterations;
                }
            }
            log.rows.extend(rows);
        }
        episode += batch;
        if quiet >= config.patience && log.last_vi_converged {
            terminated = true;
            break;
        }
    }
    Ok(RunOutcome {
        estimate: qe,
        log,
        terminated,
    })
}
