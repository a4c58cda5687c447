//! Report structures and rendering: a line-oriented human summary or a
//! machine-readable JSON document, selected by flag.

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct TrialStats {
    pub trial: usize,
    pub seed: u64,
    pub estimate: f64,
    /// Engine time over all batches, excluding input parsing and waits.
    pub processing_seconds: f64,
    /// Time spent reading and parsing input that did not overlap compute.
    pub io_seconds: f64,
    pub throughput_edges_per_sec: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub config: RunConfig,
    /// Estimator count actually used (after any accuracy-target sizing).
    pub estimators_used: usize,
    pub groups_used: usize,
    pub m_seen: u64,
    pub trials: Vec<TrialStats>,
    /// Median of the per-trial estimates.
    pub final_estimate: f64,
    pub median_processing_seconds: f64,
    pub median_io_seconds: f64,
    pub exact_triangle_count: Option<u64>,
    /// Mean over trials of |estimate - exact| / exact, in percent.
    pub mean_deviation_percent: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub batch_size: usize,
    pub workers: usize,
    pub estimate: f64,
    pub processing_seconds: f64,
    pub throughput_edges_per_sec: f64,
    /// Processing time of the first sweep point divided by this row's;
    /// for a worker sweep starting at one worker this is the speedup.
    pub speedup_vs_first: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub input: std::path::PathBuf,
    pub estimators: usize,
    pub seed: u64,
    pub m_seen: u64,
    pub sweep: &'static str,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactReport {
    pub input: std::path::PathBuf,
    pub vertices: u64,
    pub edges: u64,
    pub max_degree: u64,
    pub triangles: u64,
}

pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[(v.len() - 1) / 2]
}

impl EstimateReport {
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let p = |s: &mut String, line: String| s.push_str(&(line + "\n"));
        p(&mut out, format!("input:               {}", self.config.input.display()));
        p(&mut out, format!("edges ingested:      {}", self.m_seen));
        p(
            &mut out,
            format!(
                "estimators:          {} ({} groups)",
                self.estimators_used, self.groups_used
            ),
        );
        p(&mut out, format!("trials:              {}", self.trials.len()));
        for t in &self.trials {
            p(
                &mut out,
                format!(
                    "  trial {:>2}: estimate {:>18.2}  proc {:>8.3}s  io {:>7.3}s  {:>12.0} edges/s",
                    t.trial, t.estimate, t.processing_seconds, t.io_seconds,
                    t.throughput_edges_per_sec
                ),
            );
        }
        p(&mut out, format!("final estimate:      {:.2}", self.final_estimate));
        p(
            &mut out,
            format!("median processing:   {:.3}s", self.median_processing_seconds),
        );
        p(&mut out, format!("median io:           {:.3}s", self.median_io_seconds));
        if let Some(exact) = self.exact_triangle_count {
            p(&mut out, format!("exact count:         {exact}"));
        }
        if let Some(md) = self.mean_deviation_percent {
            p(&mut out, format!("mean deviation:      {md:.3}%"));
        }
        out
    }
}

impl BenchReport {
    pub fn render_human(&self) -> String {
        let mut out = format!(
            "input: {} (m = {}, r = {}, sweep over {})\n",
            self.input.display(),
            self.m_seen,
            self.estimators,
            self.sweep
        );
        out.push_str("batch_size  workers  processing_s  throughput_eps  speedup_vs_first\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:>10}  {:>7}  {:>12.3}  {:>14.0}  {:>16.2}\n",
                r.batch_size, r.workers, r.processing_seconds, r.throughput_edges_per_sec,
                r.speedup_vs_first
            ));
        }
        out
    }
}

impl ExactReport {
    pub fn render_human(&self) -> String {
        format!(
            "input:      {}\nvertices:   {}\nedges:      {}\nmax degree: {}\ntriangles:  {}\n",
            self.input.display(),
            self.vertices,
            self.edges,
            self.max_degree,
            self.triangles
        )
    }
}
