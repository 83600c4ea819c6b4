//! Baselines and reference oracles for small Bayes-adaptive MDPs.
//!
//! [`QmdpPolicy`] acts greedily on belief-averaged latent Q-values.
//! [`BeliefGridOracle`] solves discrete models over a simplex lattice of beliefs,
//! and [`TwoPhaseOracle`] handles models whose belief only moves when the latent
//! is revealed outright.

pub mod error;
pub mod grid;
pub mod lattice;
pub mod optimal;
pub mod qmdp;
pub mod two_phase;

pub use error::{OracleError, Result};
pub use grid::{BeliefGridOracle, OracleSettings};
pub use lattice::SimplexLattice;
pub use optimal::oracle_optimal_return;
pub use qmdp::{qmdp_policy, QmdpPolicy};
pub use two_phase::TwoPhaseOracle;
