//! Domain types for Bayes-adaptive MDPs over a finite set of latent MDPs.
//!
//! A [`LatentMdpFamily`] describes the latent MDPs; [`Belief`] is a point on the
//! simplex over latents; [`belief_update`], [`belief_reward`] and
//! [`step_belief_mdp`] give the belief-MDP reformulation.

pub mod bamdp;
pub mod belief;
pub mod checks;
pub mod error;
pub mod exec;
pub mod model;
pub mod policy;

pub use bamdp::{belief_reward, belief_update, step_belief_mdp, BeliefStep};
pub use belief::{Belief, HyperState, LatentVar, CLAMP_FLOOR};
pub use error::{CoreError, Result};
pub use exec::Exec;
pub use model::{Action, LatentMdpFamily, Stencil};
pub use policy::{
    episode_rng, evaluate_policy, mean_and_stderr, simulate, EpisodeReturn, EvalSettings, Policy,
    Trajectory,
};
