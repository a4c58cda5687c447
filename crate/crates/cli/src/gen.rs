//! Reproducible synthetic edge streams for stress tests and statistics.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricount_core::Edge;

/// Synthetic graph families.
#[derive(Debug, Clone, Copy)]
pub enum SyntheticKind {
    /// Every vertex pair is an edge independently with probability `p`.
    Gnp { nodes: u64, edge_prob: f64 },
    /// Erased configuration model with Pareto-tailed degrees: vertex
    /// degrees are drawn as `min_degree * U^(-1/(exponent-1))`, stubs are
    /// shuffled and paired, and self-loops and duplicate pairs dropped.
    Powerlaw { nodes: u64, exponent: f64, min_degree: u64 },
}

/// Generates the edge sequence for `kind`, deterministically in `seed`.
pub fn generate_edges(kind: SyntheticKind, seed: u64) -> Vec<Edge> {
    match kind {
        SyntheticKind::Gnp { nodes, edge_prob } => gnp(nodes, edge_prob, seed),
        SyntheticKind::Powerlaw { nodes, exponent, min_degree } => {
            powerlaw(nodes, exponent, min_degree, seed)
        }
    }
}

fn gnp(n: u64, p: f64, seed: u64) -> Vec<Edge> {
    assert!(n >= 2, "need at least two vertices");
    assert!((0.0..=1.0).contains(&p), "edge probability out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if p <= 0.0 {
        return edges;
    }
    // Walk the upper triangle in row-major order, jumping geometrically
    // between successes; p = 1 degenerates to every pair.
    let total: u128 = n as u128 * (n as u128 - 1) / 2;
    let mut k: u128 = 0;
    let (mut row, mut row_start): (u64, u128) = (0, 0);
    let log1p = (1.0 - p).ln();
    loop {
        if p < 1.0 {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            k += (u.ln() / log1p).floor() as u128;
        }
        if k >= total {
            break;
        }
        // Advance the row pointer to the row containing linear index k.
        while row_start + (n - row - 1) as u128 <= k {
            row_start += (n - row - 1) as u128;
            row += 1;
        }
        let col = row + 1 + (k - row_start) as u64;
        edges.push(Edge::new(row, col).expect("col > row"));
        k += 1;
        if p >= 1.0 && k >= total {
            break;
        }
    }
    edges
}

fn powerlaw(n: u64, exponent: f64, min_degree: u64, seed: u64) -> Vec<Edge> {
    assert!(n >= 2, "need at least two vertices");
    assert!(exponent > 1.0, "exponent must exceed 1");
    assert!(min_degree >= 1, "min degree must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = 1.0 / (exponent - 1.0);
    let cap = (n - 1).min(1 << 20);
    let mut stubs: Vec<u64> = Vec::new();
    for v in 0..n {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let degree = ((min_degree as f64) * u.powf(-alpha)).floor() as u64;
        for _ in 0..degree.clamp(min_degree, cap) {
            stubs.push(v);
        }
    }
    if stubs.len() % 2 == 1 {
        stubs.push(rng.gen_range(0..n));
    }
    // Fisher-Yates, then pair consecutive stubs, erasing degenerates.
    for i in (1..stubs.len()).rev() {
        stubs.swap(i, rng.gen_range(0..=i));
    }
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        if let Ok(edge) = Edge::new(pair[0], pair[1]) {
            if seen.insert(edge) {
                edges.push(edge);
            }
        }
    }
    edges
}

/// Writes an edge list in the plain-text input format.
pub fn write_edge_list(path: impl AsRef<Path>, edges: &[Edge]) -> std::io::Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# {} edges", edges.len())?;
    for e in edges {
        let (u, v) = e.endpoints();
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}
