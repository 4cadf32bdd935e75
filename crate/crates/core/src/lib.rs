//! Simulation laboratory for k-token dissemination on adversarial dynamic
//! networks: a deterministic round engine, adversary constructions,
//! symmetric-difference forwarding protocols, a two-party sampling protocol
//! with communication accounting, and offline flow-based schedulers.

pub mod adversary;
pub mod dist;
pub mod engine;
pub mod error;
pub mod graph;
pub mod offline;
pub mod protocol;
pub mod rng;
pub mod sampling;
pub mod schedule;
pub mod token;

pub use dist::{init_distribution, InitSpec, TokenDistribution};
pub use engine::{
    apply_exchanges, run_simulation, AdversarySpec, ProtocolSpec, RunTrace, SimOptions,
};
pub use error::{Error, Result};
pub use graph::{GraphSequence, RoundGraph};
pub use rng::RunRng;
pub use schedule::{GoalSpec, Schedule, ScheduleMode, Transfer, Verdict};
pub use token::TokenSet;
