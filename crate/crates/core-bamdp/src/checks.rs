//! Randomized checks of Bayes-estimator properties over a model.

use rand::Rng;
use serde::Serialize;

use crate::bamdp::belief_update;
use crate::belief::{Belief, LatentVar};
use crate::model::LatentMdpFamily;

/// Outcome of a randomized property check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest observed value of the checked ratio or error.
    pub worst: f64,
}

impl CheckReport {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.violations as f64 / self.trials as f64
        }
    }
}

/// Uniform draw from the simplex (flat Dirichlet).
pub fn random_belief<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Belief {
    let draws: Vec<f64> = (0..count)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    Belief::new(draws).expect("exponential draws are positive")
}

struct Trial<S> {
    state: S,
    action: usize,
    next: S,
}

fn random_trial<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    states: &[M::State],
    rng: &mut R,
) -> Trial<M::State> {
    let state = states[rng.random_range(0..states.len())].clone();
    let action = rng.random_range(0..model.num_actions());
    let latent = LatentVar(rng.random_range(0..model.num_latents()));
    let next = model.sample_next(&state, latent, action, rng);
    Trial {
        state,
        action,
        next,
    }
}

/// Posteriors must be probability vectors summing to one within `1e-9`.
pub fn simplex_closure<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    states: &[M::State],
    trials: usize,
    rng: &mut R,
) -> CheckReport {
    let mut report = CheckReport {
        trials: 0,
        violations: 0,
        worst: 0.0,
    };
    while report.trials < trials {
        let t = random_trial(model, states, rng);
        let b = random_belief(model.num_latents(), rng);
        let Ok(post) = belief_update(model, &b, &t.state, t.action, &t.next) else {
            continue;
        };
        report.trials += 1;
        let err = (post.weights().iter().sum::<f64>() - 1.0).abs();
        report.worst = report.worst.max(err);
        if err > 1e-9 || post.weights().iter().any(|w| *w < 0.0) {
            report.violations += 1;
        }
    }
    report
}

/// One-hot beliefs must be fixed points for transitions their latent can produce.
pub fn vertex_absorption<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    states: &[M::State],
    trials: usize,
    rng: &mut R,
) -> CheckReport {
    let mut report = CheckReport {
        trials: 0,
        violations: 0,
        worst: 0.0,
    };
    while report.trials < trials {
        let state = states[rng.random_range(0..states.len())].clone();
        let action = rng.random_range(0..model.num_actions());
        let latent = LatentVar(rng.random_range(0..model.num_latents()));
        // A redrawn latent leaves the vertex by construction.
        if model.redraws_latent(&state, action) {
            continue;
        }
        let next = model.sample_next(&state, latent, action, rng);
        let vertex = Belief::one_hot(model.num_latents(), latent);
        report.trials += 1;
        match belief_update(model, &vertex, &state, action, &next) {
            Ok(post) if post == vertex => {}
            Ok(post) => {
                report.violations += 1;
                report.worst = report.worst.max(post.l1_distance(&vertex));
            }
            Err(_) => report.violations += 1,
        }
    }
    report
}

/// L1 non-expansion of the Bayes estimator for pairs of beliefs sharing `(s, a, s')`.
///
/// `worst` is the largest ratio of posterior to prior distance.
pub fn belief_contraction<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    states: &[M::State],
    trials: usize,
    rng: &mut R,
) -> CheckReport {
    let mut report = CheckReport {
        trials: 0,
        violations: 0,
        worst: 0.0,
    };
    while report.trials < trials {
        let t = random_trial(model, states, rng);
        let b1 = random_belief(model.num_latents(), rng);
        let b2 = random_belief(model.num_latents(), rng);
        let (Ok(p1), Ok(p2)) = (
            belief_update(model, &b1, &t.state, t.action, &t.next),
            belief_update(model, &b2, &t.state, t.action, &t.next),
        ) else {
            continue;
        };
        report.trials += 1;
        let before = b1.l1_distance(&b2);
        let after = p1.l1_distance(&p2);
        if before > 0.0 {
            report.worst = report.worst.max(after / before);
        }
        if after > before + 1e-9 {
            report.violations += 1;
        }
    }
    report
}
