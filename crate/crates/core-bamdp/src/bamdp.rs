//! The belief-MDP view: Bayes estimator, belief-averaged reward and sampled steps.

use rand::Rng;

use crate::belief::{Belief, LatentVar};
use crate::error::{CoreError, Result};
use crate::model::{Action, LatentMdpFamily};

/// One step of the belief MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefStep<S> {
    pub reward: f64,
    pub next_state: S,
    pub next_belief: Belief,
}

fn check<M: LatentMdpFamily>(model: &M, belief: &Belief, action: Action) -> Result<()> {
    if belief.len() != model.num_latents() {
        return Err(CoreError::DimensionMismatch {
            expected: model.num_latents(),
            got: belief.len(),
        });
    }
    if action >= model.num_actions() {
        return Err(CoreError::ActionOutOfRange {
            action,
            count: model.num_actions(),
        });
    }
    Ok(())
}

/// Posterior over latents after observing `state --action--> next`.
///
/// Actions that redraw the latent reset the posterior to the prior once the
/// transition has been checked for consistency.
pub fn belief_update<M: LatentMdpFamily>(
    model: &M,
    belief: &Belief,
    state: &M::State,
    action: Action,
    next: &M::State,
) -> Result<Belief> {
    check(model, belief, action)?;
    let masses: Vec<f64> = belief
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if *w > 0.0 {
                w * model.transition_likelihood(state, LatentVar(i), action, next)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(CoreError::ImpossibleTransition);
    }
    if model.redraws_latent(state, action) {
        return Ok(model.prior().clone());
    }
    Belief::from_masses(masses)
}

/// Belief-averaged expected reward.
pub fn belief_reward<M: LatentMdpFamily>(
    model: &M,
    state: &M::State,
    belief: &Belief,
    action: Action,
) -> f64 {
    belief
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| w * model.reward(state, LatentVar(i), action))
        .sum()
}

/// Sample a belief-MDP transition: draw a latent from the belief, then a successor state.
pub fn step_belief_mdp<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    state: &M::State,
    belief: &Belief,
    action: Action,
    rng: &mut R,
) -> Result<BeliefStep<M::State>> {
    check(model, belief, action)?;
    let latent = belief.sample_with(rng.random::<f64>());
    let next_state = model.sample_next(state, latent, action, rng);
    let next_belief = belief_update(model, belief, state, action, &next_state)?;
    Ok(BeliefStep {
        reward: belief_reward(model, state, belief, action),
        next_state,
        next_belief,
    })
}
