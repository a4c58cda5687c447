//! The counting runner: streams batches into a fresh engine per trial and
//! assembles the report.
//!
//! Parsing runs on its own thread one to two batches ahead of ingestion
//! (a two-slot channel), so input I/O overlaps compute; the reported I/O
//! time is the time the engine actually spent waiting for data, and the
//! processing time covers only the batch updates.

use std::sync::mpsc;
use std::time::{Duration, Instant};

use thiserror::Error;
use tricount_core::engine::{derive_seed, Engine, EngineError};
use tricount_core::{exec, oracle, Edge, Exec};

use crate::config::RunConfig;
use crate::parse::{BatchReader, ParseError};
use crate::report::{median, EstimateReport, TrialStats};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Aggregate(#[from] tricount_core::aggregate::AggregateError),
    #[error("exact count failed: {0}")]
    Oracle(#[from] oracle::OracleError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Graph facts gathered by a pre-scan (needed for exact checks and for
/// sizing the estimator pool from an accuracy target).
struct Prescan {
    m: u64,
    max_degree: u64,
    exact: Option<u64>,
}

fn prescan(cfg: &RunConfig) -> Result<Prescan, RunError> {
    let edges = crate::parse::read_all(&cfg.input)?;
    let graph = oracle::OrderedGraph::from_edges(edges)?;
    Ok(Prescan {
        m: graph.edge_count(),
        max_degree: graph.max_degree(),
        exact: cfg.exact_check.then(|| graph.exact_triangle_count()),
    })
}

/// Runs the configured number of trials and reports estimates, accuracy
/// (when an exact count is requested), and timing.
pub fn run_count(cfg: &RunConfig) -> Result<EstimateReport, RunError> {
    cfg.validate().map_err(RunError::InvalidConfig)?;

    let wants_sizing = cfg.epsilon.is_some() && cfg.delta.is_some();
    let scan = if cfg.exact_check || wants_sizing { Some(prescan(cfg)?) } else { None };

    let estimators_used = if wants_sizing {
        let scan = scan.as_ref().expect("prescan ran for sizing");
        let tau = cfg.tau_floor.ok_or_else(|| {
            RunError::InvalidConfig(
                "sizing from epsilon/delta needs --tau-floor (a triangle-count lower bound)"
                    .into(),
            )
        })?;
        tricount_core::aggregate::required_estimators(
            cfg.epsilon.unwrap(),
            cfg.delta.unwrap(),
            scan.m,
            scan.max_degree,
            tau,
        )? as usize
    } else {
        cfg.estimators
    };
    let groups = cfg.group_count();

    let mut trials = Vec::with_capacity(cfg.trials);
    let mut m_seen = 0;
    for trial in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, trial as u64);
        let outcome = run_trial(cfg, estimators_used, groups, seed)?;
        m_seen = outcome.m_seen;
        trials.push(TrialStats {
            trial,
            seed,
            estimate: outcome.estimate,
            processing_seconds: outcome.processing.as_secs_f64(),
            io_seconds: outcome.io.as_secs_f64(),
            throughput_edges_per_sec: if outcome.processing.is_zero() {
                0.0
            } else {
                outcome.m_seen as f64 / outcome.processing.as_secs_f64()
            },
        });
    }

    let estimates: Vec<f64> = trials.iter().map(|t| t.estimate).collect();
    let exact = scan.as_ref().and_then(|s| s.exact);
    let mean_deviation_percent = exact.filter(|&t| t > 0).map(|tau| {
        estimates.iter().map(|e| (e - tau as f64).abs() / tau as f64 * 100.0).sum::<f64>()
            / estimates.len() as f64
    });
    Ok(EstimateReport {
        config: cfg.clone(),
        estimators_used,
        groups_used: groups,
        m_seen,
        final_estimate: median(&estimates),
        median_processing_seconds: median(
            &trials.iter().map(|t| t.processing_seconds).collect::<Vec<_>>(),
        ),
        median_io_seconds: median(&trials.iter().map(|t| t.io_seconds).collect::<Vec<_>>()),
        trials,
        exact_triangle_count: exact,
        mean_deviation_percent,
    })
}

struct TrialOutcome {
    estimate: f64,
    m_seen: u64,
    processing: Duration,
    io: Duration,
}

fn run_trial(
    cfg: &RunConfig,
    estimators: usize,
    groups: usize,
    seed: u64,
) -> Result<TrialOutcome, RunError> {
    let (tx, rx) = mpsc::sync_channel::<Result<Vec<Edge>, ParseError>>(2);
    let path = cfg.input.clone();
    let batch_size = cfg.batch_size;
    let reader = std::thread::spawn(move || match BatchReader::open(&path, batch_size) {
        Err(e) => {
            let _ = tx.send(Err(e));
        }
        Ok(batches) => {
            for batch in batches {
                if tx.send(batch).is_err() {
                    return;
                }
            }
        }
    });

    let result = exec::with_worker_count(cfg.workers, move || -> Result<TrialOutcome, RunError> {
        let mut engine = Engine::new(estimators, seed, Exec::Parallel);
        let mut processing = Duration::ZERO;
        let mut io = Duration::ZERO;
        loop {
            let wait = Instant::now();
            let message = rx.recv();
            io += wait.elapsed();
            let batch = match message {
                Err(_) => break, // reader finished and closed the channel
                Ok(batch) => batch?,
            };
            let work = Instant::now();
            engine.ingest_batch(&batch)?;
            processing += work.elapsed();
        }
        let estimate = engine.estimate(groups)?;
        Ok(TrialOutcome { estimate, m_seen: engine.state().m_seen, processing, io })
    });
    reader.join().expect("reader thread panicked");
    result
}
