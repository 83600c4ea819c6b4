use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Lipschitz constants of the belief-space Q-function and the metric weight.
///
/// `l_q = max((l_r + gamma * v_max * l_p) / alpha, r_max + gamma * (2 - gamma) / (1 - gamma) * v_max)`
/// and the optimistic estimator uses `l_q_tilde = 2 * l_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProfile {
    pub l_r: f64,
    pub l_p: f64,
    pub r_max: f64,
    pub v_max: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub l_q: f64,
    pub l_q_tilde: f64,
}

fn check_discount(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(SolverError::InvalidDiscount(gamma))
    }
}

/// The state-distance term of the bound, `l_r + gamma * v_max * l_p`.
fn state_term(l_r: f64, l_p: f64, r_max: f64, gamma: f64) -> f64 {
    l_r + gamma * (r_max / (1.0 - gamma)) * l_p
}

/// The belief-distance term of the bound.
fn belief_term(r_max: f64, gamma: f64) -> f64 {
    let v_max = r_max / (1.0 - gamma);
    r_max + gamma * (2.0 - gamma) / (1.0 - gamma) * v_max
}

/// The metric weight that makes both branches of the `l_q` maximum equal.
///
/// Falls back to 1 when the state term vanishes.
pub fn balanced_alpha(l_r: f64, l_p: f64, r_max: f64, gamma: f64) -> Result<f64> {
    check_discount(gamma)?;
    let a = state_term(l_r, l_p, r_max, gamma);
    let b = belief_term(r_max, gamma);
    Ok(if a > 0.0 && b > 0.0 { a / b } else { 1.0 })
}

pub fn compute_lipschitz_profile(
    l_r: f64,
    l_p: f64,
    r_max: f64,
    gamma: f64,
    alpha: f64,
) -> Result<LipschitzProfile> {
    check_discount(gamma)?;
    let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
    if !finite_nonneg(l_r) || !finite_nonneg(l_p) {
        return Err(SolverError::InvalidProfile(format!(
            "l_r={l_r} and l_p={l_p} must be finite and nonnegative"
        )));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(SolverError::InvalidProfile(format!(
            "r_max={r_max} must be positive"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SolverError::InvalidProfile(format!(
            "alpha={alpha} must be positive"
        )));
    }
    let v_max = r_max / (1.0 - gamma);
    let l_q = (state_term(l_r, l_p, r_max, gamma) / alpha).max(belief_term(r_max, gamma));
    Ok(LipschitzProfile {
        l_r,
        l_p,
        r_max,
        v_max,
        gamma,
        alpha,
        l_q,
        l_q_tilde: 2.0 * l_q,
    })
}

impl LipschitzProfile {
    /// Profile of a model, with `alpha` defaulting to the balanced weight.
    pub fn for_model<M: core_bamdp::LatentMdpFamily>(
        model: &M,
        gamma: f64,
        alpha: Option<f64>,
    ) -> Result<Self> {
        let (l_r, l_p, r_max) = (
            model.lipschitz_reward(),
            model.lipschitz_transition(),
            model.r_max(),
        );
        let alpha = match alpha {
            Some(a) => a,
            None => balanced_alpha(l_r, l_p, r_max, gamma)?,
        };
        compute_lipschitz_profile(l_r, l_p, r_max, gamma, alpha)
    }

    /// Replace `l_q` (and `l_q_tilde = 2 l_q`) with a tuned constant.
    pub fn with_l_q(mut self, l_q: f64) -> Result<Self> {
        if !(l_q > 0.0 && l_q.is_finite()) {
            return Err(SolverError::InvalidProfile(format!(
                "l_q override {l_q} must be positive"
            )));
        }
        self.l_q = l_q;
        self.l_q_tilde = 2.0 * l_q;
        Ok(self)
    }

    pub fn q_max(&self) -> f64 {
        self.v_max
    }
}
