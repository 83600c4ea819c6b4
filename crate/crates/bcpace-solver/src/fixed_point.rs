//! Synchronous value iteration over the sample set.

use std::collections::HashMap;

use core_bamdp::{Belief, Exec, LatentMdpFamily};
use serde::{Deserialize, Serialize};

use crate::estimator::QEstimate;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// Sup-norm change of each sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl FixedPointReport {
    /// Sweeps whose change exceeds `gamma` times the previous one (plus `1e-9`).
    pub fn contraction_violations(&self, gamma: f64) -> usize {
        self.residuals
            .windows(2)
            .filter(|w| w[1] > gamma * w[0] + 1e-9)
            .count()
    }
}

/// How one successor-action value is computed from the current q-values.
enum Plan {
    Fixed(f64),
    Neighbors {
        upper: f64,
        start: usize,
        end: usize,
    },
}

struct Backups {
    plans: Vec<Plan>,
    /// `(sample index, l_q_tilde * distance)` slices referenced by the plans.
    links: Vec<(usize, f64)>,
}

fn belief_key(belief: &Belief) -> Vec<u64> {
    belief.weights().iter().map(|w| w.to_bits()).collect()
}

impl<S: Clone + PartialEq + Eq + std::hash::Hash + Send + Sync> QEstimate<S> {
    /// Sweep cap `ceil(log(epsilon_vi / q_tilde_max) / log(gamma))`.
    pub fn iteration_cap(&self) -> usize {
        let ratio = (self.config.epsilon_vi / self.q_tilde_max()).ln() / self.config.gamma.ln();
        (ratio.ceil() as usize).max(1)
    }

    fn plan_backups<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        successors: &[(S, Belief)],
        exec: Exec,
    ) -> Backups {
        let na = model.num_actions();
        let l_tilde = self.profile.l_q_tilde;
        let k = self.config.k;
        let raw: Vec<(Option<f64>, f64, Vec<(usize, f64)>)> =
            exec.map(successors.len() * na, |idx| {
                let (state, belief) = &successors[idx / na];
                let action = idx % na;
                if model.is_terminal(state) {
                    return (
                        Some(model.reward_shift() / (1.0 - self.config.gamma)),
                        0.0,
                        Vec::new(),
                    );
                }
                if let Some(latent) = self.seeding_latent(belief) {
                    let table = self.latent_q.as_ref().expect("checked at construction");
                    return (
                        Some(table.value(model, state, latent, action)),
                        0.0,
                        Vec::new(),
                    );
                }
                let upper = self.upper_bound(model, state, belief, action);
                let reach = upper / l_tilde * (1.0 + 1e-12);
                let found = self
                    .samples
                    .knn(model, state, belief, action, k, reach, &[]);
                (
                    None,
                    upper,
                    found
                        .into_iter()
                        .map(|n| (n.index, l_tilde * n.distance))
                        .collect(),
                )
            });
        let mut plans = Vec::with_capacity(raw.len());
        let mut links = Vec::new();
        for (fixed, upper, found) in raw {
            match fixed {
                Some(v) => plans.push(Plan::Fixed(v)),
                None => {
                    let start = links.len();
                    links.extend(found);
                    plans.push(Plan::Neighbors {
                        upper,
                        start,
                        end: links.len(),
                    });
                }
            }
        }
        Backups { plans, links }
    }

    /// Iterate `q_i <- r_i + gamma * max_a estimate(s'_i, b'_i, a)` synchronously
    /// until the sup-norm change is at most `epsilon_vi` or the sweep cap is hit.
    pub fn fixed_point<M: LatentMdpFamily<State = S>>(
        &mut self,
        model: &M,
        exec: Exec,
    ) -> FixedPointReport {
        if self.samples.is_empty() {
            return FixedPointReport {
                iterations: 0,
                residuals: Vec::new(),
                converged: true,
            };
        }
        let mut ids: HashMap<(S, Vec<u64>), usize> = HashMap::new();
        let mut successors: Vec<(S, Belief)> = Vec::new();
        let succ_of: Vec<usize> = self
            .samples
            .samples()
            .iter()
            .map(|s| {
                *ids.entry((s.next_state.clone(), belief_key(&s.next_belief)))
                    .or_insert_with(|| {
                        successors.push((s.next_state.clone(), s.next_belief.clone()));
                        successors.len() - 1
                    })
            })
            .collect();
        let backups = self.plan_backups(model, &successors, exec);
        let rewards: Vec<f64> = self.samples.samples().iter().map(|s| s.reward).collect();

        let na = model.num_actions();
        let k = self.config.k as f64;
        let gamma = self.config.gamma;
        let ceiling = self.q_tilde_max();
        let cap = self.iteration_cap();
        let mut q = self.samples.q_values();
        let mut report = FixedPointReport::default();
        while report.iterations < cap {
            let succ_values: Vec<f64> = exec.map(successors.len(), |u| {
                (0..na)
                    .map(|a| match backups.plans[u * na + a] {
                        Plan::Fixed(v) => v,
                        Plan::Neighbors { upper, start, end } => {
                            let links = &backups.links[start..end];
                            let found: f64 = links
                                .iter()
                                .map(|&(j, bonus)| (bonus + q[j]).min(upper))
                                .sum();
                            (found + (k - links.len() as f64) * upper) / k
                        }
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            });
            let next: Vec<f64> = exec.map(q.len(), |i| {
                (rewards[i] + gamma * succ_values[succ_of[i]]).clamp(0.0, ceiling)
            });
            let delta = next
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            q = next;
            report.iterations += 1;
            report.residuals.push(delta);
            if delta <= self.config.epsilon_vi {
                report.converged = true;
                break;
            }
        }
        self.samples.set_q_values(&q);
        report
    }
}
