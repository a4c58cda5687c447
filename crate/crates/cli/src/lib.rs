//! Command-line front end for streaming approximate triangle counting:
//! edge-list ingestion, counting runs, benchmark sweeps, synthetic graph
//! generation, and exact counting at desk scale.

pub mod bench;
pub mod config;
pub mod gen;
pub mod parse;
pub mod report;
pub mod run;

pub use config::{OutputFormat, RunConfig};
pub use run::RunError;
