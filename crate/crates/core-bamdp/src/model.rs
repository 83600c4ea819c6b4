use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::belief::{Belief, HyperState, LatentVar};

/// Index into the finite, ordered action set.
pub type Action = usize;

/// Interpolation weights of a state over a model's value nodes.
pub type Stencil = Vec<(usize, f64)>;

/// A finite family of MDPs that share states and actions and differ by a latent index.
///
/// Rewards are already shifted into `[0, r_max()]`; `reward_shift()` records the
/// constant added to every native reward. Terminal states are absorbing and pay
/// `reward_shift()` per step, which is a native reward of zero, so discounted
/// values stay consistent under the shift.
///
/// The initial distribution factorizes as a fixed start state times `prior()`.
pub trait LatentMdpFamily: Send + Sync {
    type State: Clone + Debug + PartialEq + Eq + Hash + Send + Sync + Serialize + DeserializeOwned;

    fn name(&self) -> &str;

    fn num_latents(&self) -> usize;

    fn num_actions(&self) -> usize;

    fn action_label(&self, action: Action) -> &'static str;

    /// Expected shifted reward of taking `action` in `state` under `latent`.
    fn reward(&self, state: &Self::State, latent: LatentVar, action: Action) -> f64;

    /// Shifted reward realized on a concrete transition. Defaults to [`Self::reward`].
    fn transition_reward(
        &self,
        state: &Self::State,
        latent: LatentVar,
        action: Action,
        _next: &Self::State,
    ) -> f64 {
        self.reward(state, latent, action)
    }

    /// Probability mass (or density) of reaching `next`.
    fn transition_likelihood(
        &self,
        state: &Self::State,
        latent: LatentVar,
        action: Action,
        next: &Self::State,
    ) -> f64;

    fn sample_next<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        latent: LatentVar,
        action: Action,
        rng: &mut R,
    ) -> Self::State;

    /// Finite weighted successor set. Exact for discrete models; a quadrature
    /// of the noise distribution for continuous ones.
    fn successor_support(
        &self,
        state: &Self::State,
        latent: LatentVar,
        action: Action,
    ) -> Vec<(Self::State, f64)>;

    fn initial_state(&self) -> Self::State;

    /// Prior over latents; also the belief every episode starts from.
    fn prior(&self) -> &Belief;

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> HyperState<Self::State> {
        let latent = self.prior().sample_with(rng.random::<f64>());
        HyperState {
            state: self.initial_state(),
            latent,
        }
    }

    /// Metric on states; actions are compared separately.
    fn state_distance(&self, a: &Self::State, b: &Self::State) -> f64;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// True when taking `action` in `state` redraws the latent from the prior.
    fn redraws_latent(&self, _state: &Self::State, _action: Action) -> bool {
        false
    }

    fn r_max(&self) -> f64;

    fn reward_shift(&self) -> f64;

    /// Reward Lipschitz constant under [`Self::state_distance`].
    fn lipschitz_reward(&self) -> f64;

    /// L1 transition Lipschitz constant under [`Self::state_distance`].
    fn lipschitz_transition(&self) -> f64;

    /// Whether the state space is finite and `value_nodes` enumerates it.
    fn is_discrete(&self) -> bool;

    /// Nodes on which latent values are tabulated at the given resolution.
    fn value_nodes(&self, resolution: f64) -> Vec<Self::State>;

    /// Interpolation weights of `state` over `value_nodes(resolution)`.
    fn node_weights(&self, resolution: f64, state: &Self::State) -> Stencil;
}
