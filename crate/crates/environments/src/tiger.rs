//! The Tiger problem as a two-latent BAMDP.
//!
//! The last observation is folded into the state: listening moves to
//! `HeardLeft` or `HeardRight` with a latent-dependent likelihood. Opening a
//! door ends the episode, or with `renewal` returns to `Start` with a freshly
//! drawn tiger (the usual infinite-horizon POMDP benchmark).

use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar, Stencil};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::lipschitz_by_enumeration;
use crate::error::{invalid, Result};

pub const LISTEN: Action = 0;
pub const OPEN_LEFT: Action = 1;
pub const OPEN_RIGHT: Action = 2;

pub const TIGER_LEFT: LatentVar = LatentVar(0);
pub const TIGER_RIGHT: LatentVar = LatentVar(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TigerState {
    Start,
    HeardLeft,
    HeardRight,
    Terminal,
}

impl TigerState {
    pub const ALL: [TigerState; 4] = [
        TigerState::Start,
        TigerState::HeardLeft,
        TigerState::HeardRight,
        TigerState::Terminal,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TigerParams {
    pub listen_accuracy: f64,
    pub reward_correct: f64,
    pub reward_tiger: f64,
    pub listen_cost: f64,
    /// Opening a door restarts at `Start` with a new tiger instead of terminating.
    pub renewal: bool,
}

impl Default for TigerParams {
    fn default() -> Self {
        Self {
            listen_accuracy: 0.85,
            reward_correct: 10.0,
            reward_tiger: -100.0,
            listen_cost: -1.0,
            renewal: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TigerEnv {
    params: TigerParams,
    shift: f64,
    r_max: f64,
    prior: Belief,
    l_r: f64,
    l_p: f64,
}

impl TigerEnv {
    pub fn new(params: TigerParams) -> Result<Self> {
        let acc = params.listen_accuracy;
        if !(acc > 0.0 && acc < 1.0) {
            return Err(invalid(
                "tiger",
                format!("listen_accuracy {acc} must lie in (0, 1)"),
            ));
        }
        let natives = [
            params.reward_correct,
            params.reward_tiger,
            params.listen_cost,
            0.0,
        ];
        if natives.iter().any(|r| !r.is_finite()) {
            return Err(invalid("tiger", "rewards must be finite"));
        }
        let low = natives.iter().cloned().fold(f64::INFINITY, f64::min);
        let high = natives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shift = -low;
        let mut env = Self {
            params,
            shift,
            r_max: high + shift,
            prior: Belief::uniform(2),
            l_r: 0.0,
            l_p: 0.0,
        };
        let (l_r, l_p) = lipschitz_by_enumeration(&env, &TigerState::ALL);
        env.l_r = l_r;
        env.l_p = l_p;
        Ok(env)
    }

    pub fn params(&self) -> &TigerParams {
        &self.params
    }

    fn after_open(&self) -> TigerState {
        if self.params.renewal {
            TigerState::Start
        } else {
            TigerState::Terminal
        }
    }

    fn hear_left_prob(&self, latent: LatentVar) -> f64 {
        if latent == TIGER_LEFT {
            self.params.listen_accuracy
        } else {
            1.0 - self.params.listen_accuracy
        }
    }

    fn native_reward(&self, state: TigerState, latent: LatentVar, action: Action) -> f64 {
        if state == TigerState::Terminal {
            return 0.0;
        }
        let p = &self.params;
        match (action, latent == TIGER_LEFT) {
            (LISTEN, _) => p.listen_cost,
            (OPEN_LEFT, true) | (OPEN_RIGHT, false) => p.reward_tiger,
            _ => p.reward_correct,
        }
    }
}

impl LatentMdpFamily for TigerEnv {
    type State = TigerState;

    fn name(&self) -> &str {
        "tiger"
    }

    fn num_latents(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn action_label(&self, action: Action) -> &'static str {
        ["listen", "open-left", "open-right"][action]
    }

    fn reward(&self, state: &TigerState, latent: LatentVar, action: Action) -> f64 {
        self.native_reward(*state, latent, action) + self.shift
    }

    fn transition_likelihood(
        &self,
        state: &TigerState,
        latent: LatentVar,
        action: Action,
        next: &TigerState,
    ) -> f64 {
        self.successor_support(state, latent, action)
            .into_iter()
            .filter(|(s, _)| s == next)
            .map(|(_, p)| p)
            .sum()
    }

    fn sample_next<R: Rng + ?Sized>(
        &self,
        state: &TigerState,
        latent: LatentVar,
        action: Action,
        rng: &mut R,
    ) -> TigerState {
        match (*state, action) {
            (TigerState::Terminal, _) => TigerState::Terminal,
            (_, LISTEN) => {
                if rng.random::<f64>() < self.hear_left_prob(latent) {
                    TigerState::HeardLeft
                } else {
                    TigerState::HeardRight
                }
            }
            _ => self.after_open(),
        }
    }

    fn successor_support(
        &self,
        state: &TigerState,
        latent: LatentVar,
        action: Action,
    ) -> Vec<(TigerState, f64)> {
        match (*state, action) {
            (TigerState::Terminal, _) => vec![(TigerState::Terminal, 1.0)],
            (_, LISTEN) => {
                let left = self.hear_left_prob(latent);
                vec![
                    (TigerState::HeardLeft, left),
                    (TigerState::HeardRight, 1.0 - left),
                ]
            }
            _ => vec![(self.after_open(), 1.0)],
        }
    }

    fn initial_state(&self) -> TigerState {
        TigerState::Start
    }

    fn prior(&self) -> &Belief {
        &self.prior
    }

    fn state_distance(&self, a: &TigerState, b: &TigerState) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }

    fn is_terminal(&self, state: &TigerState) -> bool {
        *state == TigerState::Terminal
    }

    fn redraws_latent(&self, state: &TigerState, action: Action) -> bool {
        self.params.renewal && action != LISTEN && *state != TigerState::Terminal
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

    fn value_nodes(&self, _resolution: f64) -> Vec<TigerState> {
        TigerState::ALL.to_vec()
    }

    fn node_weights(&self, _resolution: f64, state: &TigerState) -> Stencil {
        vec![(state.index(), 1.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_rewards_span_zero_to_r_max() {
        let env = TigerEnv::new(TigerParams::default()).unwrap();
        assert_eq!(env.reward_shift(), 100.0);
        assert_eq!(env.r_max(), 110.0);
        assert_eq!(env.reward(&TigerState::Start, TIGER_LEFT, OPEN_LEFT), 0.0);
        assert_eq!(
            env.reward(&TigerState::Start, TIGER_LEFT, OPEN_RIGHT),
            110.0
        );
        assert_eq!(
            env.reward(&TigerState::HeardLeft, TIGER_RIGHT, LISTEN),
            99.0
        );
        assert_eq!(
            env.reward(&TigerState::Terminal, TIGER_RIGHT, LISTEN),
            100.0
        );
    }

    #[test]
    fn enumerated_constants() {
        let env = TigerEnv::new(TigerParams::default()).unwrap();
        assert_eq!(env.lipschitz_reward(), 100.0);
        assert_eq!(env.lipschitz_transition(), 2.0);
    }

    #[test]
    fn rejects_degenerate_accuracy() {
        assert!(TigerEnv::new(TigerParams {
            listen_accuracy: 1.0,
            ..Default::default()
        })
        .is_err());
    }
}
