//! Optimal Q-values of the individual latent MDPs, the Lipschitz profile of the
//! belief-space Q-function, and the QMDP value built from them.

pub mod cache;
pub mod error;
pub mod lipschitz;
pub mod qmdp;
pub mod table;

pub use cache::{CacheKey, QCache};
pub use error::{Result, SolverError};
pub use lipschitz::{balanced_alpha, compute_lipschitz_profile, LipschitzProfile};
pub use qmdp::{qmdp_action, qmdp_action_values, qmdp_value};
pub use table::{argmax, solve_latent_q, LatentQTable, LatentSolveSettings};
