//! Reference optimal returns for the benchmark environments.

use core_bamdp::{simulate, Exec, HyperState, LatentMdpFamily};
use environments::Environment;
use latent_qsolver::{solve_latent_q, LatentSolveSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{BeliefGridOracle, OracleSettings};
use crate::two_phase::TwoPhaseOracle;

/// Optimal expected discounted return from the start state and prior, on the native reward scale.
///
/// Discrete models use the belief-grid oracle. Light-Dark uses the two-phase
/// oracle over a latent table of pitch `resolution`; when its dynamics are
/// deterministic the two-phase policy is rolled out per latent for `horizon`
/// steps, otherwise its value at the start is returned.
pub fn oracle_optimal_return(
    env: &Environment,
    settings: OracleSettings,
    resolution: f64,
    horizon: usize,
) -> Result<f64> {
    match env {
        Environment::Tiger(model) => grid_return(model, settings),
        Environment::Chain(model) => grid_return(model, settings),
        Environment::LightDark(model) => {
            let latent = LatentSolveSettings {
                gamma: settings.gamma,
                tol: settings.tol,
                resolution,
                ..Default::default()
            };
            let table = solve_latent_q(model, latent, Exec::Sequential)?;
            let oracle = TwoPhaseOracle::solve(model, table, settings)?;
            if model.is_deterministic() {
                let mut total = 0.0;
                for latent in model.prior().support(0.0) {
                    let start = HyperState {
                        state: model.initial_state(),
                        latent,
                    };
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    let run = simulate(model, &oracle, start, horizon, settings.gamma, &mut rng)?;
                    total += model.prior().get(latent) * run.returns.raw_discounted;
                }
                Ok(total)
            } else {
                Ok(oracle.start_value(model)? - model.reward_shift() / (1.0 - settings.gamma))
            }
        }
    }
}

fn grid_return<M: LatentMdpFamily>(model: &M, settings: OracleSettings) -> Result<f64>
where
    M::State: std::fmt::Debug,
{
    let oracle = BeliefGridOracle::solve(model, settings)?;
    let value = oracle.value(&model.initial_state(), model.prior());
    Ok(value - model.reward_shift() / (1.0 - settings.gamma))
}
