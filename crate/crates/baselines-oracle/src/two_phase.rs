//! Oracle for models whose belief stays at the prior until one transition reveals the latent.

use core_bamdp::{belief_reward, belief_update, Action, Belief, LatentMdpFamily, Policy};
use latent_qsolver::{argmax, LatentQTable};

use crate::error::{OracleError, Result};
use crate::grid::OracleSettings;

/// Beliefs within this L1 distance of a vertex or of the prior are treated as equal to it.
const BELIEF_MATCH: f64 = 1e-9;

/// Prior-belief values on the latent table's grid, with latent values after revelation.
#[derive(Debug, Clone)]
pub struct TwoPhaseOracle {
    table: LatentQTable,
    gamma: f64,
    /// Value of each value node while the belief is still the prior.
    pre_values: Vec<f64>,
    residual: f64,
}

/// One successor: either a fixed continuation or an interpolated prior-phase value.
enum Continuation {
    Fixed(f64),
    Prior(Vec<(usize, f64)>),
}

impl TwoPhaseOracle {
    pub fn solve<M: LatentMdpFamily>(
        model: &M,
        table: LatentQTable,
        settings: OracleSettings,
    ) -> Result<Self> {
        if (table.gamma() - settings.gamma).abs() > 0.0 {
            return Err(OracleError::InvalidSettings(
                "latent table and oracle use different discounts".into(),
            ));
        }
        let nodes = model.value_nodes(table.resolution());
        let na = model.num_actions();
        let mut oracle = Self {
            table,
            gamma: settings.gamma,
            pre_values: vec![0.0; nodes.len()],
            residual: 0.0,
        };
        let mut plans = Vec::with_capacity(nodes.len() * na);
        for node in &nodes {
            for action in 0..na {
                plans.push(oracle.plan(model, node, action)?);
            }
        }
        let mut iterations = 0;
        loop {
            let next: Vec<f64> = (0..nodes.len())
                .map(|i| {
                    (0..na)
                        .map(|a| oracle.evaluate(&plans[i * na + a]))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let delta = next
                .iter()
                .zip(&oracle.pre_values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            oracle.pre_values = next;
            iterations += 1;
            if delta <= settings.tol {
                oracle.residual = delta;
                return Ok(oracle);
            }
            if iterations >= settings.max_iters {
                return Err(OracleError::NonConvergence {
                    iterations,
                    residual: delta,
                });
            }
        }
    }

    /// Expected reward and successor continuations of `action` at `state` under the prior.
    fn plan<M: LatentMdpFamily>(
        &self,
        model: &M,
        state: &M::State,
        action: Action,
    ) -> Result<(f64, Vec<(f64, Continuation)>)> {
        let prior = model.prior();
        let mut conts = Vec::new();
        for latent in prior.support(0.0) {
            for (next, p) in model.successor_support(state, latent, action) {
                let weight = prior.get(latent) * p;
                let posterior = belief_update(model, prior, state, action, &next)?;
                let cont = if model.is_terminal(&next) {
                    Continuation::Fixed(model.reward_shift() / (1.0 - self.gamma))
                } else if let Some(revealed) = vertex(&posterior) {
                    Continuation::Fixed(self.table.state_value(model, &next, revealed))
                } else if posterior.l1_distance(prior) <= BELIEF_MATCH {
                    Continuation::Prior(model.node_weights(self.table.resolution(), &next))
                } else {
                    return Err(OracleError::OracleInfeasible(format!(
                        "{} beliefs leave the prior without collapsing",
                        model.name()
                    )));
                };
                conts.push((weight, cont));
            }
        }
        Ok((belief_reward(model, state, prior, action), conts))
    }

    fn evaluate(&self, plan: &(f64, Vec<(f64, Continuation)>)) -> f64 {
        let (reward, conts) = plan;
        let cont: f64 = conts
            .iter()
            .map(|(w, c)| {
                w * match c {
                    Continuation::Fixed(v) => *v,
                    Continuation::Prior(stencil) => {
                        stencil.iter().map(|&(n, u)| u * self.pre_values[n]).sum()
                    }
                }
            })
            .sum();
        reward + self.gamma * cont
    }

    /// Action values at `state` while the belief is still the prior.
    pub fn prior_action_values<M: LatentMdpFamily>(
        &self,
        model: &M,
        state: &M::State,
    ) -> Result<Vec<f64>> {
        (0..model.num_actions())
            .map(|a| Ok(self.evaluate(&self.plan(model, state, a)?)))
            .collect()
    }

    /// Optimal value at the start state and prior, shifted scale.
    pub fn start_value<M: LatentMdpFamily>(&self, model: &M) -> Result<f64> {
        let values = self.prior_action_values(model, &model.initial_state())?;
        Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn table(&self) -> &LatentQTable {
        &self.table
    }
}

fn vertex(belief: &Belief) -> Option<core_bamdp::LatentVar> {
    let (latent, dist) = belief.nearest_vertex();
    (dist <= BELIEF_MATCH).then_some(latent)
}

impl<M: LatentMdpFamily> Policy<M> for TwoPhaseOracle {
    fn act(&self, model: &M, state: &M::State, belief: &Belief) -> Action {
        match vertex(belief) {
            Some(latent) => argmax(&self.table.action_values(model, state, latent)),
            None => argmax(
                &self
                    .prior_action_values(model, state)
                    .expect("checked during solve"),
            ),
        }
    }
}
