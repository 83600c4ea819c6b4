use core_bamdp::{Action, Exec, LatentMdpFamily, LatentVar};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Settings for latent value iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatentSolveSettings {
    pub gamma: f64,
    /// Stop once the sup-norm change of a sweep is at most `tol`.
    pub tol: f64,
    /// Grid pitch for continuous-state models; ignored by discrete ones.
    pub resolution: f64,
    pub max_iters: usize,
}

impl Default for LatentSolveSettings {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tol: 1e-6,
            resolution: 0.05,
            max_iters: 20_000,
        }
    }
}

impl LatentSolveSettings {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SolverError::InvalidDiscount(self.gamma));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SolverError::InvalidSettings(format!(
                "tol={} must be positive",
                self.tol
            )));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(SolverError::InvalidSettings(format!(
                "resolution={} must be positive",
                self.resolution
            )));
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidSettings(
                "max_iters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Optimal Q-values of every latent MDP over the model's value nodes.
///
/// Entries are laid out as `[latent][node][action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentQTable {
    settings: LatentSolveSettings,
    num_latents: usize,
    num_nodes: usize,
    num_actions: usize,
    values: Vec<f64>,
    /// Sup-norm change of each sweep, in order.
    residuals: Vec<f64>,
}

/// One Bellman backup target: expected reward plus weighted successor nodes.
struct Backup {
    reward: f64,
    successors: Vec<(usize, f64)>,
    redraw: bool,
}

fn merge_stencil(out: &mut Vec<(usize, f64)>, node: usize, weight: f64) {
    match out.iter_mut().find(|(n, _)| *n == node) {
        Some(entry) => entry.1 += weight,
        None => out.push((node, weight)),
    }
}

/// Solve all latent MDPs jointly by synchronous value iteration.
///
/// Latents are coupled only when the model redraws the latent, in which case
/// the continuation averages over the prior.
pub fn solve_latent_q<M: LatentMdpFamily>(
    model: &M,
    settings: LatentSolveSettings,
    exec: Exec,
) -> Result<LatentQTable> {
    settings.validate()?;
    let nodes = model.value_nodes(settings.resolution);
    let (nl, nn, na) = (model.num_latents(), nodes.len(), model.num_actions());
    let gamma = settings.gamma;

    let backups: Vec<Backup> = exec.map(nl * nn * na, |idx| {
        let a = idx % na;
        let i = (idx / na) % nn;
        let latent = LatentVar(idx / (na * nn));
        let state = &nodes[i];
        let mut successors = Vec::new();
        for (next, p) in model.successor_support(state, latent, a) {
            for (node, w) in model.node_weights(settings.resolution, &next) {
                merge_stencil(&mut successors, node, p * w);
            }
        }
        Backup {
            reward: model.reward(state, latent, a),
            successors,
            redraw: model.redraws_latent(state, a),
        }
    });
    let prior = model.prior().weights().to_vec();

    let mut q = vec![0.0; nl * nn * na];
    let mut v = vec![0.0; nl * nn];
    let mut residuals = Vec::new();
    loop {
        let mixed: Vec<f64> = (0..nn)
            .map(|i| (0..nl).map(|l| prior[l] * v[l * nn + i]).sum())
            .collect();
        let next: Vec<f64> = exec.map(q.len(), |idx| {
            let backup = &backups[idx];
            let latent = idx / (na * nn);
            let cont: f64 = backup
                .successors
                .iter()
                .map(|&(n, w)| {
                    w * if backup.redraw {
                        mixed[n]
                    } else {
                        v[latent * nn + n]
                    }
                })
                .sum();
            backup.reward + gamma * cont
        });
        let delta = next
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        for (cell, row) in v.iter_mut().zip(q.chunks(na)) {
            *cell = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
        residuals.push(delta);
        if delta <= settings.tol {
            break;
        }
        if residuals.len() >= settings.max_iters {
            return Err(SolverError::NonConvergence {
                iterations: residuals.len(),
                residual: delta,
                tol: settings.tol,
            });
        }
    }
    Ok(LatentQTable {
        settings,
        num_latents: nl,
        num_nodes: nn,
        num_actions: na,
        values: q,
        residuals,
    })
}

impl LatentQTable {
    pub fn settings(&self) -> &LatentSolveSettings {
        &self.settings
    }

    pub fn gamma(&self) -> f64 {
        self.settings.gamma
    }

    pub fn resolution(&self) -> f64 {
        self.settings.resolution
    }

    pub fn num_latents(&self) -> usize {
        self.num_latents
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Final sup-norm Bellman residual.
    pub fn vi_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    pub fn residual_history(&self) -> &[f64] {
        &self.residuals
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// The `[node][action]` block of one latent.
    pub fn slice(&self, latent: LatentVar) -> &[f64] {
        let len = self.num_nodes * self.num_actions;
        &self.values[latent.0 * len..(latent.0 + 1) * len]
    }

    pub fn node_value(&self, latent: LatentVar, node: usize, action: Action) -> f64 {
        self.values[(latent.0 * self.num_nodes + node) * self.num_actions + action]
    }

    /// `Q(s, latent, a)`, interpolated over the model's value nodes.
    pub fn value<M: LatentMdpFamily>(
        &self,
        model: &M,
        state: &M::State,
        latent: LatentVar,
        action: Action,
    ) -> f64 {
        model
            .node_weights(self.settings.resolution, state)
            .into_iter()
            .map(|(node, w)| w * self.node_value(latent, node, action))
            .sum()
    }

    /// All action values at `(s, latent)`.
    pub fn action_values<M: LatentMdpFamily>(
        &self,
        model: &M,
        state: &M::State,
        latent: LatentVar,
    ) -> Vec<f64> {
        (0..self.num_actions)
            .map(|a| self.value(model, state, latent, a))
            .collect()
    }

    pub fn state_value<M: LatentMdpFamily>(
        &self,
        model: &M,
        state: &M::State,
        latent: LatentVar,
    ) -> f64 {
        self.action_values(model, state, latent)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest tabulated value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Whether the table was built for a model with these dimensions.
    pub fn fits<M: LatentMdpFamily>(&self, model: &M) -> bool {
        self.num_latents == model.num_latents()
            && self.num_actions == model.num_actions()
            && self.num_nodes == model.value_nodes(self.settings.resolution).len()
    }
}

/// First index of the maximum; earlier actions win ties.
pub fn argmax(values: &[f64]) -> Action {
    let mut best = 0;
    for (a, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = a;
        }
    }
    best
}
