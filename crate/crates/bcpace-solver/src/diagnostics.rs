//! Cover-size estimates and randomized checks of a trained estimate.

use core_bamdp::checks::{random_belief, CheckReport};
use core_bamdp::{episode_rng, simulate, Action, Belief, LatentMdpFamily};
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{QEstimate, SUPPORT_FLOOR};
use crate::index::compound_distance;

/// A visited `(s, b, a)` tuple.
pub type Tuple<S> = (S, Belief, Action);

/// Size of a greedy `radius`-packing of `points` under the compound metric.
///
/// Points are scanned in order and kept when farther than `radius` from every
/// kept point with the same action.
pub fn greedy_packing<M: LatentMdpFamily>(
    model: &M,
    alpha: f64,
    points: &[Tuple<M::State>],
    radius: f64,
) -> usize {
    let mut centers: Vec<Vec<usize>> = vec![Vec::new(); model.num_actions()];
    for (i, (s, b, a)) in points.iter().enumerate() {
        let far = centers[*a].iter().all(|&c| {
            let (cs, cb, _) = &points[c];
            compound_distance(model, alpha, s, b, cs, cb) > radius
        });
        if far {
            centers[*a].push(i);
        }
    }
    centers.iter().map(Vec::len).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverReport {
    pub radius: f64,
    pub points: usize,
    /// Packing size over all points.
    pub full: usize,
    /// Packing size after dropping latent-seeded and terminal tuples.
    pub reduced: usize,
    pub ratio: f64,
}

/// Sample tuples followed by tuples visited by `episodes` greedy rollouts.
pub fn traced_tuples<M: LatentMdpFamily>(
    model: &M,
    qe: &QEstimate<M::State>,
    episodes: usize,
    seed: u64,
) -> Result<Vec<Tuple<M::State>>> {
    let mut out: Vec<Tuple<M::State>> = qe
        .samples()
        .samples()
        .iter()
        .map(|s| (s.state.clone(), s.belief.clone(), s.action))
        .collect();
    for e in 0..episodes {
        let mut rng = episode_rng(seed, e as u64);
        let start = model.sample_initial(&mut rng);
        let trace = simulate(
            model,
            qe,
            start,
            qe.config().horizon,
            qe.config().gamma,
            &mut rng,
        )?;
        out.extend(trace.steps);
    }
    Ok(out)
}

pub fn cover_report<M: LatentMdpFamily>(
    model: &M,
    qe: &QEstimate<M::State>,
    points: &[Tuple<M::State>],
    radius: f64,
) -> CoverReport {
    let alpha = qe.profile().alpha;
    let full = greedy_packing(model, alpha, points, radius);
    let reduced_points: Vec<Tuple<M::State>> = points
        .iter()
        .filter(|(s, b, _)| !model.is_terminal(s) && qe.seeding_latent(b).is_none())
        .cloned()
        .collect();
    let reduced = greedy_packing(model, alpha, &reduced_points, radius);
    let ratio = if full == 0 {
        1.0
    } else {
        reduced as f64 / full as f64
    };
    CoverReport {
        radius,
        points: points.len(),
        full,
        reduced,
        ratio,
    }
}

/// Random same-action query pairs outside the seeded region must satisfy
/// `|Q(x1) - Q(x2)| <= l_q_tilde * dist(x1, x2) + 1e-9`.
///
/// With the best-case bound enabled the ceiling depends on the query, so pairs
/// share their state and have full-support beliefs, where it is constant.
pub fn estimator_lipschitz_check<M: LatentMdpFamily, R: Rng + ?Sized>(
    model: &M,
    qe: &QEstimate<M::State>,
    states: &[M::State],
    trials: usize,
    rng: &mut R,
) -> CheckReport {
    let candidates: Vec<&M::State> = states.iter().filter(|s| !model.is_terminal(s)).collect();
    let mut report = CheckReport {
        trials: 0,
        violations: 0,
        worst: 0.0,
    };
    if candidates.is_empty() {
        return report;
    }
    let shared_state = qe.config().use_best_case_bound && qe.latent_q().is_some();
    let n = model.num_latents();
    let alpha = qe.profile().alpha;
    while report.trials < trials {
        let s1 = candidates[rng.random_range(0..candidates.len())];
        let s2 = if shared_state {
            s1
        } else {
            candidates[rng.random_range(0..candidates.len())]
        };
        let (b1, b2) = (random_belief(n, rng), random_belief(n, rng));
        if qe.seeding_latent(&b1).is_some() || qe.seeding_latent(&b2).is_some() {
            continue;
        }
        if shared_state
            && (b1.support(SUPPORT_FLOOR).count() < n || b2.support(SUPPORT_FLOOR).count() < n)
        {
            continue;
        }
        let action = rng.random_range(0..model.num_actions());
        report.trials += 1;
        let gap = (qe.estimate(model, s1, &b1, action) - qe.estimate(model, s2, &b2, action)).abs();
        let dist = compound_distance(model, alpha, s1, &b1, s2, &b2);
        let excess = gap - qe.profile().l_q_tilde * dist;
        report.worst = report.worst.max(excess);
        if excess > 1e-9 {
            report.violations += 1;
        }
    }
    report
}
