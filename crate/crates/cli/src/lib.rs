//! Library behind the `kgossip` binary: spec-string parsing, CSV writers,
//! the subcommand implementations and the experiment scenario registry.

pub mod commands;
pub mod csv;
pub mod experiment;
pub mod spec;
