//! Optimistic nearest-neighbor value estimation over state-belief-action space.
//!
//! [`run`] explores a Bayes-adaptive MDP with a greedy policy on the optimistic
//! estimate [`QEstimate`], adding a sample whenever it visits a tuple that is
//! not yet known, and re-solving the sample values by [`QEstimate::fixed_point`].

pub mod artifact;
pub mod bound;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod fixed_point;
pub mod index;
pub mod run;
pub mod sample;

pub use artifact::{load_artifact, save_artifact, Artifact, ARTIFACT_VERSION};
pub use bound::{sample_complexity, sample_complexity_bound, ComplexityBound};
pub use config::SolverConfig;
pub use diagnostics::{
    cover_report, estimator_lipschitz_check, greedy_packing, traced_tuples, CoverReport, Tuple,
};
pub use error::{BcpaceError, Result};
pub use estimator::{Basis, QEstimate, SUPPORT_FLOOR};
pub use fixed_point::FixedPointReport;
pub use index::{compound_distance, Neighbor, SampleSet};
pub use run::{run, EpisodeRow, RunOutcome, TrainingLog};
pub use sample::Sample;
