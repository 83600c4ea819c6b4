//! Assumption constants of finite models under the discrete metric.

use core_bamdp::{LatentMdpFamily, LatentVar};

/// Largest reward gap and L1 transition gap between distinct states, per unit
/// of [`LatentMdpFamily::state_distance`], over every latent and action.
pub fn lipschitz_by_enumeration<M: LatentMdpFamily>(model: &M, states: &[M::State]) -> (f64, f64) {
    let mut l_r: f64 = 0.0;
    let mut l_p: f64 = 0.0;
    for latent in (0..model.num_latents()).map(LatentVar) {
        for a in 0..model.num_actions() {
            for (i, s1) in states.iter().enumerate() {
                let p1 = model.successor_support(s1, latent, a);
                for s2 in &states[i + 1..] {
                    let d = model.state_distance(s1, s2);
                    if d <= 0.0 {
                        continue;
                    }
                    let dr = (model.reward(s1, latent, a) - model.reward(s2, latent, a)).abs();
                    let p2 = model.successor_support(s2, latent, a);
                    l_r = l_r.max(dr / d);
                    l_p = l_p.max(l1_gap(&p1, &p2) / d);
                }
            }
        }
    }
    (l_r, l_p)
}

fn l1_gap<S: PartialEq>(p: &[(S, f64)], q: &[(S, f64)]) -> f64 {
    let mass = |set: &[(S, f64)], s: &S| {
        set.iter()
            .filter(|(t, _)| t == s)
            .map(|(_, w)| w)
            .sum::<f64>()
    };
    let mut seen: Vec<&S> = Vec::new();
    let mut gap = 0.0;
    for (s, _) in p.iter().chain(q) {
        if seen.contains(&s) {
            continue;
        }
        seen.push(s);
        gap += (mass(p, s) - mass(q, s)).abs();
    }
    gap
}
