//! Engine behavior checked against the brute-force oracle: state-contract
//! clauses after every batch, sampling distributions, and determinism
//! across execution modes and worker counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricount_core::engine::Engine;
use tricount_core::estimator::validate_nbsi;
use tricount_core::oracle::OrderedGraph;
use tricount_core::stats;
use tricount_core::{Edge, Exec};

fn e(a: u64, b: u64) -> Edge {
    Edge::new(a, b).unwrap()
}

fn random_graph(n: u64, p: f64, seed: u64) -> Vec<Edge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push(e(u, v));
            }
        }
    }
    // Stream order independent of vertex numbering.
    for i in (1..edges.len()).rev() {
        edges.swap(i, rng.gen_range(0..=i));
    }
    edges
}

fn batches(stream: &[Edge], size: usize) -> Vec<&[Edge]> {
    stream.chunks(size).collect()
}

#[test]
fn nbsi_clauses_hold_after_every_batch() {
    for graph_seed in 0..3 {
        let stream = random_graph(24, 0.25, 100 + graph_seed);
        for engine_seed in 0..10 {
            for batch_size in [1usize, 7, 64, usize::MAX] {
                let size = batch_size.min(stream.len().max(1));
                let mut engine = Engine::new(4, engine_seed, Exec::Parallel);
                let mut seen: Vec<Edge> = Vec::new();
                for batch in batches(&stream, size) {
                    engine.ingest_batch(batch).unwrap();
                    seen.extend_from_slice(batch);
                    for i in 0..engine.estimator_count() {
                        let est = engine.estimator(i);
                        if let Err(v) = validate_nbsi(&est, &seen) {
                            panic!(
                                "graph {graph_seed} seed {engine_seed} s={batch_size} \
                                 after {} edges, estimator {i}: {v}",
                                seen.len()
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn level1_edge_is_uniform_over_the_stream() {
    // Joint check of the level-1 and level-2 choices on a fixed stream:
    // P(f1 = e) = 1/m, and conditioned on f1, P(f2 = f) = 1/|later
    // neighborhood|. Ingested in several batches to cross boundaries.
    let stream = random_graph(10, 0.45, 42);
    let m = stream.len();
    let graph = OrderedGraph::from_edges(stream.clone()).unwrap();
    let r = 200_000;
    let mut engine = Engine::new(r, 2024, Exec::Parallel);
    for batch in batches(&stream, 7) {
        engine.ingest_batch(batch).unwrap();
    }

    // Category per (f1, f2-or-none) outcome with its exact probability.
    let mut index = std::collections::HashMap::new();
    let mut expected = Vec::new();
    for &f1 in &stream {
        let neighborhood = graph.neighborhood_after(f1).unwrap();
        if neighborhood.is_empty() {
            index.insert((f1, None), expected.len());
            expected.push(r as f64 / m as f64);
        } else {
            for f2 in neighborhood.iter() {
                index.insert((f1, Some(*f2)), expected.len());
                expected.push(r as f64 / (m as f64 * neighborhood.len() as f64));
            }
        }
    }
    let mut observed = vec![0u64; expected.len()];
    for i in 0..r {
        let est = engine.estimator(i);
        let key = (est.f1.unwrap(), est.f2);
        observed[*index.get(&key).expect("estimator state must be a valid outcome")] += 1;
    }
    let marginal_f1: Vec<u64> = {
        let mut per_edge = std::collections::HashMap::new();
        for ((f1, _), &slot) in &index {
            *per_edge.entry(*f1).or_insert(0u64) += observed[slot];
        }
        stream.iter().map(|f1| per_edge[f1]).collect()
    };
    let fit1 = stats::chi_square_gof(&marginal_f1, &vec![r as f64 / m as f64; m]);
    assert!(fit1.p_value > 0.001, "level-1 marginal not uniform: {fit1:?}");
    let joint = stats::chi_square_gof(&observed, &expected);
    assert!(joint.p_value > 0.001, "joint level-1/2 distribution off: {joint:?}");
}

#[test]
fn coarse_estimates_are_unbiased_on_a_small_graph() {
    let stream = random_graph(16, 0.4, 7);
    let graph = OrderedGraph::from_edges(stream.clone()).unwrap();
    let tau = graph.exact_triangle_count() as f64;
    assert!(tau > 0.0, "test graph must contain triangles");
    let r = 100_000;
    let mut engine = Engine::new(r, 5, Exec::Parallel);
    for batch in batches(&stream, 11) {
        engine.ingest_batch(batch).unwrap();
    }
    let coarse: Vec<f64> = engine.coarse_estimates().iter().map(|&x| x as f64).collect();
    let (mean, se) = stats::mean_and_se(&coarse);
    assert!(
        (mean - tau).abs() <= 3.0 * se,
        "mean {mean} vs tau {tau} (se {se})"
    );
}

#[test]
fn triangle_discovery_matches_claimed_probabilities() {
    let stream = random_graph(12, 0.5, 3);
    let graph = OrderedGraph::from_edges(stream.clone()).unwrap();
    let triangles = graph.triangles();
    assert!(triangles.len() >= 5, "want a few triangles, got {}", triangles.len());
    let r = 150_000;
    let mut engine = Engine::new(r, 77, Exec::Parallel);
    for batch in batches(&stream, 5) {
        engine.ingest_batch(batch).unwrap();
    }
    let mut index = std::collections::HashMap::new();
    let mut expected = Vec::new();
    let mut covered = 0.0;
    for &t in &triangles {
        let p = graph.discovery_probability(t).unwrap();
        index.insert(t, expected.len());
        expected.push(r as f64 * p);
        covered += p;
    }
    expected.push(r as f64 * (1.0 - covered));
    let mut observed = vec![0u64; expected.len()];
    for i in 0..r {
        let est = engine.estimator(i);
        match est.f3 {
            None => observed[expected.len() - 1] += 1,
            Some(_) => {
                let mut vs: Vec<u64> = [est.f1.unwrap(), est.f2.unwrap()]
                    .iter()
                    .flat_map(|x| {
                        let (u, v) = x.endpoints();
                        [u, v]
                    })
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                let t: [u64; 3] = vs.try_into().expect("wedge spans three vertices");
                observed[index[&t]] += 1;
            }
        }
    }
    let fit = stats::chi_square_gof(&observed, &expected);
    assert!(fit.p_value > 0.001, "discovery distribution off: {fit:?}");
}

#[test]
fn sequential_and_parallel_execution_agree_bitwise() {
    let stream = random_graph(40, 0.15, 9);
    let run = |exec: Exec, workers: usize| {
        tricount_core::exec::with_worker_count(workers, || {
            let mut engine = Engine::new(512, 33, exec);
            for batch in batches(&stream, 13) {
                engine.ingest_batch(batch).unwrap();
            }
            (engine.snapshot(), engine.estimate(7).unwrap())
        })
    };
    let (seq_states, seq_estimate) = run(Exec::Sequential, 1);
    let (par1_states, par1_estimate) = run(Exec::Parallel, 1);
    let (par4_states, par4_estimate) = run(Exec::Parallel, 4);
    assert_eq!(seq_states, par1_states);
    assert_eq!(seq_states, par4_states);
    assert!(seq_estimate == par1_estimate && par1_estimate == par4_estimate);
}

#[test]
fn identical_runs_reproduce_bitwise() {
    let stream = random_graph(30, 0.2, 4);
    let run = || {
        let mut engine = Engine::new(256, 12345, Exec::Parallel);
        for batch in batches(&stream, 9) {
            engine.ingest_batch(batch).unwrap();
        }
        engine.snapshot()
    };
    assert_eq!(run(), run());
}
