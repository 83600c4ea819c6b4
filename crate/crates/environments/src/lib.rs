//! Benchmark BAMDPs: Tiger, Chain and Light-Dark Tiger.
//!
//! Every model implements [`core_bamdp::LatentMdpFamily`] with rewards shifted
//! into `[0, r_max]`. Native rewards are recovered by subtracting
//! `reward_shift()` per step.

pub mod chain;
pub mod discrete;
pub mod error;
pub mod lightdark;
pub mod registry;
pub mod tiger;

pub use chain::{ChainEnv, ChainParams};
pub use error::{EnvError, Result};
pub use lightdark::{LdState, LightDarkEnv, LightDarkParams};
pub use registry::{make_env, EnvParams, Environment};
pub use tiger::{TigerEnv, TigerParams, TigerState};
