//! Monte Carlo opinion dynamics with biased belief updating and
//! budget-constrained lobbyists.
//!
//! Agents mix an optimistic and a pessimistic model of a damaging event and
//! update their mixing weight on every signal they receive, under-reacting
//! according to their bias profile. Lobbyists inject directional signals
//! following random feasible schedules. [`engine::run`] simulates one
//! population; [`sweep::run_sweep`] replicates runs over a bias grid; and
//! [`games`] solves the small instances that admit closed forms.

pub mod dynamics;
pub mod engine;
pub mod error;
pub mod games;
pub mod lobbying;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod sweep;

pub use dynamics::{BiasProfile, ModelPair, Signal, SupportedModel};
pub use engine::{run, RunResult, ScenarioConfig};
pub use error::{Error, Result};
pub use lobbying::{Lobbyist, StrategyMatrix, StrategyPool};
pub use network::DirectedGraph;
