//! The Chain problem with an unknown slip probability.
//!
//! `A` advances one state (the last state loops and pays `reward_end`), `B`
//! returns to the first state and pays `reward_reset`. With probability equal
//! to the latent slip the opposite action is executed, including its reward.

use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar, Stencil};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::lipschitz_by_enumeration;
use crate::error::{invalid, Result};

pub const ADVANCE: Action = 0;
pub const RESET: Action = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub length: usize,
    pub slips: Vec<f64>,
    /// Prior over `slips`; uniform when absent.
    pub prior: Option<Vec<f64>>,
    pub reward_end: f64,
    pub reward_reset: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            length: 5,
            slips: vec![0.2, 0.5, 0.8],
            prior: None,
            reward_end: 10.0,
            reward_reset: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainEnv {
    params: ChainParams,
    prior: Belief,
    shift: f64,
    r_max: f64,
    l_r: f64,
    l_p: f64,
}

impl ChainEnv {
    pub fn new(params: ChainParams) -> Result<Self> {
        if params.length < 2 {
            return Err(invalid("chain", "length must be at least 2"));
        }
        if params.slips.is_empty() || params.slips.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid(
                "chain",
                "slip probabilities must be nonempty and lie in [0, 1]",
            ));
        }
        let prior = match &params.prior {
            None => Belief::uniform(params.slips.len()),
            Some(w) if w.len() == params.slips.len() => {
                Belief::new(w.clone()).map_err(|e| invalid("chain", e.to_string()))?
            }
            Some(_) => return Err(invalid("chain", "prior length must match slips")),
        };
        if !params.reward_end.is_finite() || !params.reward_reset.is_finite() {
            return Err(invalid("chain", "rewards must be finite"));
        }
        let natives = [params.reward_end, params.reward_reset, 0.0];
        let low = natives.iter().cloned().fold(f64::INFINITY, f64::min);
        let high = natives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut env = Self {
            params,
            prior,
            shift: -low,
            r_max: high - low,
            l_r: 0.0,
            l_p: 0.0,
        };
        let states: Vec<usize> = (0..env.params.length).collect();
        let (l_r, l_p) = lipschitz_by_enumeration(&env, &states);
        env.l_r = l_r;
        env.l_p = l_p;
        Ok(env)
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    fn slip(&self, latent: LatentVar) -> f64 {
        self.params.slips[latent.0]
    }

    /// Successor and native reward of executing `action` without slipping.
    fn effect(&self, state: usize, action: Action) -> (usize, f64) {
        let last = self.params.length - 1;
        if action == ADVANCE {
            if state == last {
                (last, self.params.reward_end)
            } else {
                (state + 1, 0.0)
            }
        } else {
            (0, self.params.reward_reset)
        }
    }
}

impl LatentMdpFamily for ChainEnv {
    type State = usize;

    fn name(&self) -> &str {
        "chain"
    }

    fn num_latents(&self) -> usize {
        self.params.slips.len()
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn action_label(&self, action: Action) -> &'static str {
        ["A", "B"][action]
    }

    fn reward(&self, state: &usize, latent: LatentVar, action: Action) -> f64 {
        let slip = self.slip(latent);
        let (_, intended) = self.effect(*state, action);
        let (_, slipped) = self.effect(*state, 1 - action);
        (1.0 - slip) * intended + slip * slipped + self.shift
    }

    fn transition_reward(
        &self,
        state: &usize,
        _latent: LatentVar,
        _action: Action,
        next: &usize,
    ) -> f64 {
        // The executed action is identifiable from the successor: only a reset lands on 0.
        let executed = if *next == 0 { RESET } else { ADVANCE };
        self.effect(*state, executed).1 + self.shift
    }

    fn transition_likelihood(
        &self,
        state: &usize,
        latent: LatentVar,
        action: Action,
        next: &usize,
    ) -> f64 {
        self.successor_support(state, latent, action)
            .into_iter()
            .filter(|(s, _)| s == next)
            .map(|(_, p)| p)
            .sum()
    }

    fn sample_next<R: Rng + ?Sized>(
        &self,
        state: &usize,
        latent: LatentVar,
        action: Action,
        rng: &mut R,
    ) -> usize {
        let executed = if rng.random::<f64>() < self.slip(latent) {
            1 - action
        } else {
            action
        };
        self.effect(*state, executed).0
    }

    fn successor_support(
        &self,
        state: &usize,
        latent: LatentVar,
        action: Action,
    ) -> Vec<(usize, f64)> {
        let slip = self.slip(latent);
        let (intended, _) = self.effect(*state, action);
        let (slipped, _) = self.effect(*state, 1 - action);
        let mut out = Vec::with_capacity(2);
        if slip < 1.0 {
            out.push((intended, 1.0 - slip));
        }
        if slip > 0.0 {
            out.push((slipped, slip));
        }
        out
    }

    fn initial_state(&self) -> usize {
        0
    }

    fn prior(&self) -> &Belief {
        &self.prior
    }

    fn state_distance(&self, a: &usize, b: &usize) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }

    fn is_terminal(&self, _state: &usize) -> bool {
        false
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn reward_shift(&self) -> f64 {
        self.shift
    }

    fn lipschitz_reward(&self) -> f64 {
        self.l_r
    }

    fn lipschitz_transition(&self) -> f64 {
        self.l_p
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn value_nodes(&self, _resolution: f64) -> Vec<usize> {
        (0..self.params.length).collect()
    }

    fn node_weights(&self, _resolution: f64, state: &usize) -> Stencil {
        vec![(*state, 1.0)]
    }
}
