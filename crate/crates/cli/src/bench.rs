//! Benchmark mode: throughput across batch sizes and speedup across
//! worker counts.
//!
//! The whole stream is held in memory and replayed per sweep point with
//! the same seed, so the measured time is pure batch processing and rows
//! differ only in the swept parameter.

use std::time::Instant;

use tricount_core::engine::Engine;
use tricount_core::{exec, Edge, Exec};

use crate::config::RunConfig;
use crate::report::{BenchReport, BenchRow};
use crate::run::RunError;

#[derive(Debug, Clone)]
pub enum Sweep {
    BatchSizes(Vec<usize>),
    Workers(Vec<usize>),
}

impl Sweep {
    fn label(&self) -> &'static str {
        match self {
            Sweep::BatchSizes(_) => "batch sizes",
            Sweep::Workers(_) => "worker counts",
        }
    }

    fn points(&self, cfg: &RunConfig) -> Vec<(usize, usize)> {
        match self {
            Sweep::BatchSizes(sizes) => {
                sizes.iter().map(|&s| (s, cfg.workers)).collect()
            }
            Sweep::Workers(workers) => {
                workers.iter().map(|&w| (cfg.batch_size, w)).collect()
            }
        }
    }
}

/// One timed full-stream run at a fixed batch size and worker count.
/// Returns the estimate, the processing seconds, and the edge count.
pub fn time_run(
    edges: &[Edge],
    estimators: usize,
    batch_size: usize,
    workers: usize,
    seed: u64,
    groups: usize,
) -> Result<(f64, f64, u64), RunError> {
    exec::with_worker_count(workers, || {
        let mut engine = Engine::new(estimators, seed, Exec::Parallel);
        let clock = Instant::now();
        for batch in edges.chunks(batch_size.max(1)) {
            engine.ingest_batch(batch)?;
        }
        let seconds = clock.elapsed().as_secs_f64();
        let estimate = engine.estimate(groups)?;
        Ok((estimate, seconds, engine.state().m_seen))
    })
}

/// Runs the sweep over a stream already in memory.
pub fn run_benchmark_on(
    edges: &[Edge],
    cfg: &RunConfig,
    sweep: &Sweep,
) -> Result<BenchReport, RunError> {
    cfg.validate().map_err(RunError::InvalidConfig)?;
    let groups = cfg.group_count();
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut m_seen = 0;
    for (batch_size, workers) in sweep.points(cfg) {
        let (estimate, seconds, m) =
            time_run(edges, cfg.estimators, batch_size, workers, cfg.seed, groups)?;
        m_seen = m;
        let baseline = rows.first().map_or(seconds, |r: &BenchRow| r.processing_seconds);
        rows.push(BenchRow {
            batch_size,
            workers,
            estimate,
            processing_seconds: seconds,
            throughput_edges_per_sec: if seconds > 0.0 { m as f64 / seconds } else { 0.0 },
            speedup_vs_first: if seconds > 0.0 { baseline / seconds } else { 0.0 },
        });
    }
    Ok(BenchReport {
        input: cfg.input.clone(),
        estimators: cfg.estimators,
        seed: cfg.seed,
        m_seen,
        sweep: sweep.label(),
        rows,
    })
}

/// Loads the input and runs the sweep.
pub fn run_benchmark(cfg: &RunConfig, sweep: &Sweep) -> Result<BenchReport, RunError> {
    let edges = crate::parse::read_all(&cfg.input)?;
    run_benchmark_on(&edges, cfg, sweep)
}
