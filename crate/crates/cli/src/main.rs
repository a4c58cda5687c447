use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tricount_cli::bench::{run_benchmark, Sweep};
use tricount_cli::config::{OutputFormat, RunConfig, DEFAULT_BATCH_SIZE};
use tricount_cli::gen::{generate_edges, write_edge_list, SyntheticKind};
use tricount_cli::report::ExactReport;
use tricount_cli::run::run_count;

#[derive(Parser)]
#[command(
    name = "tricount",
    about = "Approximate triangle counting over a streamed, batched edge list",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Human => OutputFormat::Human,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct CommonRunArgs {
    /// Edge-list file: one "u v" pair per line, '#' comments allowed.
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Number of estimators.
    #[arg(long, short = 'r', default_value_t = 100_000)]
    estimators: usize,
    /// Edges per batch.
    #[arg(long, short = 's', default_value_t = DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per logical CPU).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Median-of-means group count (default derives from delta, or 0.1).
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the triangle count of an edge-list stream.
    Count {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Independent trials (fresh engine and derived seed each).
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Relative-error target; with --delta and --tau-floor this sizes
        /// the estimator pool, overriding -r.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Failure probability for --epsilon.
        #[arg(long)]
        delta: Option<f64>,
        /// Lower bound on the triangle count, for pool sizing.
        #[arg(long)]
        tau_floor: Option<u64>,
        /// Also compute the exact count (loads the graph into memory) and
        /// report the mean deviation.
        #[arg(long)]
        exact_check: bool,
    },
    /// Sweep batch sizes or worker counts and report throughput.
    Bench {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Comma-separated batch sizes to sweep.
        #[arg(long, conflicts_with = "sweep_workers")]
        sweep_batch_sizes: Option<String>,
        /// Comma-separated worker counts to sweep.
        #[arg(long)]
        sweep_workers: Option<String>,
    },
    /// Generate a synthetic edge list.
    Gen {
        #[command(subcommand)]
        kind: GenCommand,
    },
    /// Count triangles exactly (desk scale; loads the graph into memory).
    Exact {
        #[arg(long, short = 'i')]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: FormatArg,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Uniform random graph: every pair is an edge with probability p.
    Gnp {
        #[arg(long)]
        nodes: u64,
        #[arg(long)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Power-law graph from an erased configuration model.
    Powerlaw {
        #[arg(long)]
        nodes: u64,
        /// Degree-distribution exponent (> 1; heavier tail when smaller).
        #[arg(long, default_value_t = 2.5)]
        exponent: f64,
        #[arg(long, default_value_t = 1)]
        min_degree: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
}

fn parse_list(raw: &str, what: &str) -> Result<Vec<usize>> {
    let values: Vec<usize> = raw
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("cannot parse {what} list {raw:?}"))?;
    if values.is_empty() {
        bail!("empty {what} list");
    }
    Ok(values)
}

fn emit<T: serde::Serialize>(format: FormatArg, report: &T, human: String) -> Result<()> {
    match format {
        FormatArg::Human => print!("{human}"),
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(report)?),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Count { common, trials, epsilon, delta, tau_floor, exact_check } => {
            let format = common.format;
            let cfg = RunConfig {
                input: common.input,
                estimators: common.estimators,
                batch_size: common.batch_size,
                seed: common.seed,
                trials,
                workers: common.workers,
                epsilon,
                delta,
                tau_floor,
                exact_check,
                groups: common.groups,
                format: format.into(),
            };
            let report = run_count(&cfg)?;
            let human = report.render_human();
            emit(format, &report, human)
        }
        Command::Bench { common, sweep_batch_sizes, sweep_workers } => {
            let sweep = match (&sweep_batch_sizes, &sweep_workers) {
                (Some(s), None) => Sweep::BatchSizes(parse_list(s, "batch-size")?),
                (None, Some(w)) => Sweep::Workers(parse_list(w, "worker")?),
                _ => bail!("bench needs exactly one of --sweep-batch-sizes / --sweep-workers"),
            };
            let format = common.format;
            let mut cfg = RunConfig::new(common.input);
            cfg.estimators = common.estimators;
            cfg.batch_size = common.batch_size;
            cfg.seed = common.seed;
            cfg.workers = common.workers;
            cfg.groups = common.groups;
            cfg.format = format.into();
            let report = run_benchmark(&cfg, &sweep)?;
            let human = report.render_human();
            emit(format, &report, human)
        }
        Command::Gen { kind } => {
            let (kind, seed, output) = match kind {
                GenCommand::Gnp { nodes, edge_prob, seed, output } => {
                    (SyntheticKind::Gnp { nodes, edge_prob }, seed, output)
                }
                GenCommand::Powerlaw { nodes, exponent, min_degree, seed, output } => {
                    (SyntheticKind::Powerlaw { nodes, exponent, min_degree }, seed, output)
                }
            };
            let edges = generate_edges(kind, seed);
            write_edge_list(&output, &edges)
                .with_context(|| format!("cannot write {}", output.display()))?;
            eprintln!("wrote {} edges to {}", edges.len(), output.display());
            Ok(())
        }
        Command::Exact { input, format } => {
            let edges = tricount_cli::parse::read_all(&input)?;
            let graph = tricount_core::oracle::OrderedGraph::from_edges(edges)
                .context("input is not a simple stream")?;
            let vertices = {
                let mut vs: Vec<u64> = graph
                    .edges()
                    .iter()
                    .flat_map(|e| {
                        let (u, v) = e.endpoints();
                        [u, v]
                    })
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                vs.len() as u64
            };
            let report = ExactReport {
                input,
                vertices,
                edges: graph.edge_count(),
                max_degree: graph.max_degree(),
                triangles: graph.exact_triangle_count(),
            };
            let human = report.render_human();
            emit(format, &report, human)
        }
    }
}
