//! Value iteration over states times a simplex lattice of beliefs.

use std::collections::HashMap;

use core_bamdp::{
    belief_reward, belief_update, Action, Belief, LatentMdpFamily, LatentVar, Policy,
};
use latent_qsolver::argmax;
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Result};
use crate::lattice::SimplexLattice;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Largest L1 distance between a belief and its lattice point.
    pub pitch: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Largest admissible number of (state, lattice point) cells.
    pub cell_budget: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            pitch: 0.01,
            gamma: 0.95,
            tol: 1e-6,
            max_iters: 100_000,
            cell_budget: 5_000_000,
        }
    }
}

/// Optimal belief-MDP values with Bayes-updated beliefs snapped to a lattice.
#[derive(Debug, Clone)]
pub struct BeliefGridOracle<S> {
    settings: OracleSettings,
    lattice: SimplexLattice,
    states: Vec<S>,
    state_index: HashMap<S, usize>,
    num_actions: usize,
    /// `[state][point][action]`.
    q: Vec<f64>,
    residual: f64,
    iterations: usize,
}

struct Backup {
    reward: f64,
    successors: Vec<(usize, f64)>,
}

impl<S: Clone + Eq + std::hash::Hash + std::fmt::Debug> BeliefGridOracle<S> {
    pub fn solve<M: LatentMdpFamily<State = S>>(
        model: &M,
        settings: OracleSettings,
    ) -> Result<Self> {
        if !model.is_discrete() {
            return Err(OracleError::OracleInfeasible(format!(
                "{} has a continuous state space",
                model.name()
            )));
        }
        if model.num_latents() > 3 {
            return Err(OracleError::OracleInfeasible(format!(
                "{} latents exceed the limit of 3",
                model.num_latents()
            )));
        }
        if !(settings.pitch >= 1e-3 && settings.pitch.is_finite()) {
            return Err(OracleError::InvalidSettings(format!(
                "pitch={} must be at least 1e-3",
                settings.pitch
            )));
        }
        if !(settings.gamma > 0.0 && settings.gamma < 1.0) || !(settings.tol > 0.0) {
            return Err(OracleError::InvalidSettings(
                "gamma must lie in (0, 1) and tol be positive".into(),
            ));
        }
        let lattice = SimplexLattice::for_pitch(model.num_latents(), settings.pitch);
        let states = model.value_nodes(settings.pitch);
        let cells = states.len() * lattice.len();
        if cells > settings.cell_budget {
            return Err(OracleError::OracleInfeasible(format!(
                "{cells} cells exceed the budget of {}",
                settings.cell_budget
            )));
        }
        let state_index: HashMap<S, usize> = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let na = model.num_actions();
        let np = lattice.len();
        let beliefs: Vec<Belief> = (0..np).map(|p| lattice.belief(p)).collect();

        let mut backups = Vec::with_capacity(cells * na);
        for state in &states {
            for belief in &beliefs {
                for action in 0..na {
                    let mut mass: Vec<(S, f64)> = Vec::new();
                    for latent in belief.support(0.0) {
                        for (next, p) in model.successor_support(state, latent, action) {
                            let w = belief.get(latent) * p;
                            match mass.iter_mut().find(|(s, _)| *s == next) {
                                Some(entry) => entry.1 += w,
                                None => mass.push((next, w)),
                            }
                        }
                    }
                    let mut successors = Vec::with_capacity(mass.len());
                    for (next, p) in mass.into_iter().filter(|(_, p)| *p > 0.0) {
                        let next_belief = belief_update(model, belief, state, action, &next)?;
                        let si = *state_index.get(&next).ok_or_else(|| {
                            OracleError::OracleInfeasible(format!(
                                "successor {next:?} is not an enumerated state"
                            ))
                        })?;
                        successors.push((si * np + lattice.snap(&next_belief), p));
                    }
                    backups.push(Backup {
                        reward: belief_reward(model, state, belief, action),
                        successors,
                    });
                }
            }
        }

        let gamma = settings.gamma;
        let mut q = vec![0.0; cells * na];
        let mut v = vec![0.0; cells];
        let mut iterations = 0;
        let residual = loop {
            let next: Vec<f64> = backups
                .iter()
                .map(|b| {
                    b.reward + gamma * b.successors.iter().map(|&(c, p)| p * v[c]).sum::<f64>()
                })
                .collect();
            let delta = next
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            q = next;
            for (cell, row) in v.iter_mut().zip(q.chunks(na)) {
                *cell = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            }
            iterations += 1;
            if delta <= settings.tol {
                break delta;
            }
            if iterations >= settings.max_iters {
                return Err(OracleError::NonConvergence {
                    iterations,
                    residual: delta,
                });
            }
        };
        Ok(Self {
            settings,
            lattice,
            states,
            state_index,
            num_actions: na,
            q,
            residual,
            iterations,
        })
    }

    pub fn settings(&self) -> &OracleSettings {
        &self.settings
    }

    pub fn lattice(&self) -> &SimplexLattice {
        &self.lattice
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn cell(&self, state: &S, belief: &Belief) -> usize {
        let si = self.state_index[state];
        si * self.lattice.len() + self.lattice.snap(belief)
    }

    /// `Q*(s, snap(b), a)` on the shifted reward scale.
    pub fn q_value(&self, state: &S, belief: &Belief, action: Action) -> f64 {
        self.q[self.cell(state, belief) * self.num_actions + action]
    }

    pub fn action_values(&self, state: &S, belief: &Belief) -> Vec<f64> {
        let c = self.cell(state, belief);
        self.q[c * self.num_actions..(c + 1) * self.num_actions].to_vec()
    }

    /// `V*(s, snap(b))` on the shifted reward scale.
    pub fn value(&self, state: &S, belief: &Belief) -> f64 {
        self.action_values(state, belief)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value at a lattice point given by rank.
    pub fn value_at(&self, state: &S, point: usize) -> f64 {
        let c = self.state_index[state] * self.lattice.len() + point;
        self.q[c * self.num_actions..(c + 1) * self.num_actions]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn vertex_value(&self, state: &S, latent: LatentVar) -> f64 {
        self.value(state, &Belief::one_hot(self.lattice.dim(), latent))
    }
}

impl<M: LatentMdpFamily> Policy<M> for BeliefGridOracle<M::State> {
    fn act(&self, _model: &M, state: &M::State, belief: &Belief) -> Action {
        argmax(&self.action_values(state, belief))
    }
}
