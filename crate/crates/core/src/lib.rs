//! Streaming approximate triangle counting over batched edge arrivals.
//!
//! The crate keeps `r` independent neighborhood-sampling estimators and
//! folds each arriving batch of edges into all of them at once with
//! coordinated, data-parallel bulk updates:
//!
//! - [`primitives`]: deterministic parallel sequence operations (sort,
//!   merge, scan, multisearch, ...) with sequential reference paths;
//! - [`estimator`]: the sampled-wedge state held per estimator;
//! - [`rank`]: the per-batch rank/position index that lets every estimator
//!   count and sample its batch neighborhood without materializing it;
//! - [`engine`]: the three-step batch update applied across all estimators;
//! - [`aggregate`]: median-of-means aggregation and estimator sizing;
//! - [`oracle`]: brute-force exact counts for tests and accuracy reports;
//! - [`stats`]: small statistical-test helpers used in validation.
//!
//! Results are deterministic for a fixed seed: random decisions are
//! addressed by (estimator, batch, draw), never by scheduling order, so any
//! worker count produces bit-identical states.

pub mod aggregate;
pub mod engine;
pub mod estimator;
pub mod exec;
pub mod oracle;
pub mod primitives;
pub mod rank;
pub mod stats;
mod util;

pub use estimator::{coarse_estimate, Edge, Estimator, StreamState, VertexId};
pub use exec::Exec;
