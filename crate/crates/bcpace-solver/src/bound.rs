use latent_qsolver::LipschitzProfile;
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{BcpaceError, Result};

/// Sample-complexity number and the admissible neighbor-count window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityBound {
    /// `(2 q_max / eps) (k N + log(2 / delta)) log(r_max / eps)`.
    pub m: f64,
    /// `(q_tilde_max^2 / eps^2) log(4 N / delta)`.
    pub k_lower: f64,
    /// `4 N / delta`.
    pub k_upper: f64,
    pub k_in_window: bool,
}

impl ComplexityBound {
    pub fn window_is_empty(&self) -> bool {
        !(self.k_lower <= self.k_upper)
    }

    /// Err when no neighbor count satisfies the window.
    pub fn check_window(&self) -> Result<()> {
        if self.window_is_empty() {
            Err(BcpaceError::EmptyKWindow {
                lower: self.k_lower,
                upper: self.k_upper,
            })
        } else {
            Ok(())
        }
    }
}

pub fn sample_complexity(
    q_max: f64,
    r_max: f64,
    epsilon: f64,
    delta: f64,
    k: f64,
    cover: f64,
) -> f64 {
    (2.0 * q_max / epsilon) * (k * cover + (2.0 / delta).ln()) * (r_max / epsilon).ln()
}

/// Evaluate the bound for a cover-size estimate `cover`.
pub fn sample_complexity_bound(
    profile: &LipschitzProfile,
    config: &SolverConfig,
    cover: f64,
) -> ComplexityBound {
    let q_max = profile.q_max();
    let q_tilde_max = profile.r_max + config.gamma * q_max;
    let (eps, delta, k) = (config.epsilon, config.delta, config.k as f64);
    let k_lower = (q_tilde_max * q_tilde_max / (eps * eps)) * (4.0 * cover / delta).ln();
    let k_upper = 4.0 * cover / delta;
    ComplexityBound {
        m: sample_complexity(q_max, profile.r_max, eps, delta, k, cover),
        k_lower,
        k_upper,
        k_in_window: k_lower <= k && k <= k_upper,
    }
}
