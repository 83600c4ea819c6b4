use serde::{Deserialize, Serialize};

use crate::error::{BcpaceError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Accuracy target; also sets the latent-seeding radius `epsilon / (l_q (1 + gamma))`.
    pub epsilon: f64,
    pub delta: f64,
    /// Neighbors averaged by the estimator.
    pub k: usize,
    pub gamma: f64,
    /// Known-query radius numerator; a query is known when its k-th neighbor is
    /// within `epsilon_d / l_q_tilde`. Defaults to `epsilon`.
    pub epsilon_d: Option<f64>,
    /// Sup-norm tolerance of the sample-set value iteration.
    pub epsilon_vi: f64,
    /// Rollouts collected with a frozen estimate before each value iteration.
    /// With 1, value iteration runs after every added sample.
    pub n_batch: usize,
    pub horizon: usize,
    /// Consecutive sample-free episodes required to stop.
    pub patience: usize,
    pub max_episodes: usize,
    pub seed: u64,
    pub use_best_case_bound: bool,
    pub use_latent_init: bool,
    /// Metric weight; defaults to the value balancing the `l_q` bound.
    pub alpha: Option<f64>,
    /// Replaces the analytic `l_q` when set.
    pub lipschitz_q: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            delta: 0.1,
            k: 1,
            gamma: 0.95,
            epsilon_d: None,
            epsilon_vi: 1e-3,
            n_batch: 1,
            horizon: 30,
            patience: 25,
            max_episodes: 20_000,
            seed: 0,
            use_best_case_bound: true,
            use_latent_init: true,
            alpha: None,
            lipschitz_q: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BcpaceError::InvalidConfig(msg));
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) {
            return bad(format!("epsilon={} must lie in (0, 1)", self.epsilon));
        }
        if !open_unit(self.delta) {
            return bad(format!("delta={} must lie in (0, 1)", self.delta));
        }
        if !open_unit(self.gamma) {
            return bad(format!("gamma={} must lie in (0, 1)", self.gamma));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.epsilon_d() > 0.0 && self.epsilon_d().is_finite()) {
            return bad(format!("epsilon_d={} must be positive", self.epsilon_d()));
        }
        if !(self.epsilon_vi > 0.0 && self.epsilon_vi.is_finite()) {
            return bad(format!("epsilon_vi={} must be positive", self.epsilon_vi));
        }
        if self.horizon == 0 || self.n_batch == 0 || self.max_episodes == 0 {
            return bad("horizon, n_batch and max_episodes must be at least 1".into());
        }
        if self.alpha.is_some_and(|a| !(a > 0.0 && a.is_finite())) {
            return bad("alpha must be positive".into());
        }
        if self
            .lipschitz_q
            .is_some_and(|l| !(l > 0.0 && l.is_finite()))
        {
            return bad("lipschitz_q must be positive".into());
        }
        Ok(())
    }

    pub fn epsilon_d(&self) -> f64 {
        self.epsilon_d.unwrap_or(self.epsilon)
    }

    pub fn needs_latent_table(&self) -> bool {
        self.use_best_case_bound || self.use_latent_init
    }
}
