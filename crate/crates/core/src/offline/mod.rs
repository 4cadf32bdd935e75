//! Offline schedulers: evolution-graph construction, max flow with path
//! decomposition, gather and phase-based dissemination, tree decomposition
//! and the derandomized hitting-set selection.

pub mod derandomize;
pub mod evolution;
pub mod flow;
pub mod gather;
pub mod phases;
pub mod spread;
pub mod tree;

pub use derandomize::{
    algorithm3_derandomize, binomial, derandomized_hub_count, failure_sum, window_reach_sets,
    Algorithm3Result,
};
pub use evolution::{build_evolution, ArcKind, EvolutionGraph};
pub use flow::{FlowNetwork, FlowResult};
pub use gather::{gather_schedule, paths_to_schedule, LabeledPath};
pub use phases::{
    algorithm1, phase_count, phase_window, round_budget, Algorithm1Result, DEFAULT_PHASE_CONSTANT,
};
pub use spread::{
    algorithm2, broadcast_distance, flood_window, hub_count, hub_schedule, Algorithm2Result,
};
pub use tree::{tree_decompose, Subtree};
