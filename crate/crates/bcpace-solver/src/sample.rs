use core_bamdp::{Action, Belief};
use serde::{Deserialize, Serialize};

/// A collected transition of the belief MDP with its current value estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<S> {
    pub state: S,
    pub belief: Belief,
    pub action: Action,
    /// Belief-averaged shifted reward of `(state, belief, action)`.
    pub reward: f64,
    pub next_state: S,
    pub next_belief: Belief,
    pub q_value: f64,
}
