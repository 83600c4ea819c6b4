//! Closed-loop simulation of belief-feedback policies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bamdp::belief_update;
use crate::belief::{Belief, HyperState};
use crate::error::Result;
use crate::exec::Exec;
use crate::model::{Action, LatentMdpFamily};

/// A deterministic map from `(s, b)` to an action.
pub trait Policy<M: LatentMdpFamily>: Sync {
    fn act(&self, model: &M, state: &M::State, belief: &Belief) -> Action;
}

/// Independent random stream for episode `episode` of a run seeded with `seed`.
pub fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng
}

/// Returns of one episode. `raw` values have the reward shift removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReturn {
    pub raw: f64,
    pub raw_discounted: f64,
    pub shifted: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub returns: EpisodeReturn,
    /// `(state, belief, action)` before each step, then the final state.
    pub steps: Vec<(S, Belief, Action)>,
    pub final_state: S,
}

/// Roll `policy` out from `start` for at most `horizon` steps, stopping early at terminals.
///
/// The true latent is redrawn from the prior whenever the model says so.
pub fn simulate<M, P, R>(
    model: &M,
    policy: &P,
    start: HyperState<M::State>,
    horizon: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<Trajectory<M::State>>
where
    M: LatentMdpFamily,
    P: Policy<M> + ?Sized,
    R: Rng + ?Sized,
{
    let shift = model.reward_shift();
    let HyperState {
        mut state,
        mut latent,
    } = start;
    let mut belief = model.prior().clone();
    let mut returns = EpisodeReturn::default();
    let mut steps = Vec::new();
    let mut discount = 1.0;
    for _ in 0..horizon {
        if model.is_terminal(&state) {
            break;
        }
        let action = policy.act(model, &state, &belief);
        let next = model.sample_next(&state, latent, action, rng);
        let reward = model.transition_reward(&state, latent, action, &next);
        let next_belief = belief_update(model, &belief, &state, action, &next)?;
        if model.redraws_latent(&state, action) {
            latent = model.prior().sample_with(rng.random::<f64>());
        }
        returns.shifted += reward;
        returns.raw += reward - shift;
        returns.raw_discounted += discount * (reward - shift);
        returns.steps += 1;
        discount *= gamma;
        steps.push((state, std::mem::replace(&mut belief, next_belief), action));
        state = next;
    }
    Ok(Trajectory {
        returns,
        steps,
        final_state: state,
    })
}

/// Settings of a Monte Carlo policy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub episodes: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub seed: u64,
}

/// Episode returns in episode order; episode `i` uses `episode_rng(seed, i)`.
pub fn evaluate_policy<M, P>(
    model: &M,
    policy: &P,
    settings: EvalSettings,
    exec: Exec,
) -> Result<Vec<EpisodeReturn>>
where
    M: LatentMdpFamily,
    P: Policy<M> + ?Sized,
{
    exec.map(settings.episodes, |i| {
        let mut rng = episode_rng(settings.seed, i as u64);
        let start = model.sample_initial(&mut rng);
        simulate(
            model,
            policy,
            start,
            settings.horizon,
            settings.gamma,
            &mut rng,
        )
        .map(|t| t.returns)
    })
    .into_iter()
    .collect()
}

/// Sample mean and standard error (sample stdev over `sqrt(n)`).
///
/// Identical values give that value and an error of exactly zero.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
