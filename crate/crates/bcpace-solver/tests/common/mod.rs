#![allow(dead_code)]

use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar, Stencil};
use rand::Rng;

/// Two live states that alternate, plus an absorbing sink reached by action 2.
///
/// In a live state the action matching the latent pays 10, the other live
/// action pays 5 and the sink action pays 0. Dynamics ignore the latent, so
/// beliefs never move.
pub struct Toggle {
    prior: Belief,
    actions: usize,
}

pub const SINK: usize = 2;
pub const DIVE: Action = 2;

impl Toggle {
    pub fn new() -> Self {
        Self {
            prior: Belief::uniform(2),
            actions: 3,
        }
    }

    pub fn with_prior(prior: Belief) -> Self {
        Self { prior, actions: 3 }
    }

    /// Only action 0 is available.
    pub fn single_action() -> Self {
        Self {
            prior: Belief::uniform(2),
            actions: 1,
        }
    }

    fn next(&self, s: usize, a: Action) -> usize {
        if s == SINK || a == DIVE {
            SINK
        } else {
            1 - s
        }
    }
}

impl LatentMdpFamily for Toggle {
    type State = usize;

    fn name(&self) -> &str {
        "toggle"
    }
    fn num_latents(&self) -> usize {
        2
    }
    fn num_actions(&self) -> usize {
        self.actions
    }
    fn action_label(&self, a: Action) -> &'static str {
        ["zero", "one", "dive"][a]
    }
    fn reward(&self, s: &usize, l: LatentVar, a: Action) -> f64 {
        match (*s, a) {
            (SINK, _) | (_, DIVE) => 0.0,
            _ if a == l.0 => 10.0,
            _ => 5.0,
        }
    }
    fn transition_likelihood(&self, s: &usize, _: LatentVar, a: Action, n: &usize) -> f64 {
        if *n == self.next(*s, a) {
            1.0
        } else {
            0.0
        }
    }
    fn sample_next<R: Rng + ?Sized>(&self, s: &usize, _: LatentVar, a: Action, _: &mut R) -> usize {
        self.next(*s, a)
    }
    fn successor_support(&self, s: &usize, _: LatentVar, a: Action) -> Vec<(usize, f64)> {
        vec![(self.next(*s, a), 1.0)]
    }
    fn initial_state(&self) -> usize {
        0
    }
    fn prior(&self) -> &Belief {
        &self.prior
    }
    fn state_distance(&self, a: &usize, b: &usize) -> f64 {
        (*a as f64 - *b as f64).abs()
    }
    fn is_terminal(&self, _: &usize) -> bool {
        false
    }
    fn r_max(&self) -> f64 {
        10.0
    }
    fn reward_shift(&self) -> f64 {
        0.0
    }
    fn lipschitz_reward(&self) -> f64 {
        10.0
    }
    fn lipschitz_transition(&self) -> f64 {
        2.0
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn value_nodes(&self, _: f64) -> Vec<usize> {
        vec![0, 1, SINK]
    }
    fn node_weights(&self, _: f64, s: &usize) -> Stencil {
        vec![(*s, 1.0)]
    }
}
