//! Run configuration shared by the CLI and the library entry points.

use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Human,
    Json,
}

/// Configuration of a counting run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Number of estimators maintained by each trial's engine.
    pub estimators: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub trials: usize,
    /// Worker threads; 0 means one per logical CPU.
    pub workers: usize,
    /// Optional accuracy target; with `delta` and `tau_floor` it sizes the
    /// estimator pool instead of `estimators`.
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// User-supplied lower bound on the triangle count for pool sizing
    /// (the true count is unknown online).
    pub tau_floor: Option<u64>,
    /// Compute the exact count too and report the deviation.
    pub exact_check: bool,
    /// Median-of-means group count; defaults from `delta` (or 0.1).
    pub groups: Option<usize>,
    pub format: OutputFormat,
}

pub const DEFAULT_BATCH_SIZE: usize = 16_384;
pub const DEFAULT_DELTA_FOR_GROUPS: f64 = 0.1;

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            input: input.into(),
            estimators: 100_000,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: 0,
            trials: 1,
            workers: 0,
            epsilon: None,
            delta: None,
            tau_floor: None,
            exact_check: false,
            groups: None,
            format: OutputFormat::Human,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.estimators < 1 {
            return Err("estimators must be at least 1".into());
        }
        if self.batch_size < 1 {
            return Err("batch size must be at least 1".into());
        }
        if self.trials < 1 {
            return Err("trials must be at least 1".into());
        }
        if self.epsilon.is_some() != self.delta.is_some() {
            return Err("epsilon and delta must be given together".into());
        }
        Ok(())
    }

    /// The group count used for aggregation.
    pub fn group_count(&self) -> usize {
        match self.groups {
            Some(g) => g.max(1),
            None => tricount_core::aggregate::default_group_count(
                self.estimators,
                self.delta.unwrap_or(DEFAULT_DELTA_FOR_GROUPS),
            ),
        }
    }
}
