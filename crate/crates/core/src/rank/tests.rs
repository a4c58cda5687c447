use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

const BOTH: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn e(a: u64, b: u64) -> Edge {
    Edge::new(a, b).unwrap()
}

// The worked six-vertex example batch, with letters mapped A=1 .. F=6.
const A: u64 = 1;
const B: u64 = 2;
const C: u64 = 3;
const D: u64 = 4;
const E: u64 = 5;
const F: u64 = 6;

fn example_batch() -> Vec<Edge> {
    vec![e(B, C), e(C, D), e(E, F), e(B, D), e(D, F)]
}

#[test]
fn example_batch_rank_table_is_exact() {
    let expected: Vec<(u64, u64, u32, u32)> = vec![
        (B, D, 4, 0),
        (B, C, 1, 1),
        (C, D, 2, 0),
        (C, B, 1, 1),
        (D, F, 5, 0),
        (D, B, 4, 1),
        (D, C, 2, 2),
        (E, F, 3, 0),
        (F, D, 5, 0),
        (F, E, 3, 1),
    ];
    for exec in BOTH {
        let ranked = rank_all(exec, &example_batch());
        let got: Vec<(u64, u64, u32, u32)> = ranked
            .by_src_pos_desc()
            .iter()
            .map(|a| (a.src, a.dst, a.pos, a.rank))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(ranked.len(), 2 * example_batch().len());
    }
}

#[test]
fn example_batch_rank_queries_are_exact() {
    let ranked = rank_all(Exec::Sequential, &example_batch());
    // (src, query, expected rank) for the six worked pairs.
    let cases = [
        (C, PosQuery::Old, 2),   // C -> A: A is not a batch neighbor of C
        (C, PosQuery::At(2), 0), // C -> D
        (D, PosQuery::At(2), 2), // D -> C
        (D, PosQuery::At(5), 0), // D -> F
        (B, PosQuery::At(1), 1), // B -> C
        (B, PosQuery::At(4), 0), // B -> D
    ];
    for (src, q, want) in cases {
        assert_eq!(ranked.rank_of(src, q).unwrap(), want, "src {src} {q:?}");
    }
    let queries: Vec<(VertexId, PosQuery)> = cases.iter().map(|c| (c.0, c.1)).collect();
    let want: Vec<u64> = cases.iter().map(|c| c.2).collect();
    for exec in BOTH {
        assert_eq!(ranked.query_rank_outgoing(exec, &queries).unwrap(), want);
    }
}

#[test]
fn absent_vertex_has_zero_degree_and_position_queries_fail() {
    let ranked = rank_all(Exec::Sequential, &example_batch());
    assert_eq!(ranked.rank_of(99, PosQuery::Old).unwrap(), 0);
    assert_eq!(
        ranked.rank_of(99, PosQuery::At(1)),
        Err(RankQueryError::MissingArc { src: 99, pos: 1 })
    );
    assert_eq!(
        ranked.rank_of(C, PosQuery::At(3)),
        Err(RankQueryError::MissingArc { src: C, pos: 3 })
    );
    assert!(ranked
        .query_rank_outgoing(Exec::Parallel, &[(C, PosQuery::At(3))])
        .is_err());
}

#[test]
fn single_edge_batch() {
    for exec in BOTH {
        let ranked = rank_all(exec, &[e(7, 9)]);
        let got: Vec<(u64, u64, u32, u32)> = ranked
            .by_src_pos_desc()
            .iter()
            .map(|a| (a.src, a.dst, a.pos, a.rank))
            .collect();
        assert_eq!(got, vec![(7, 9, 1, 0), (9, 7, 1, 0)]);

        let empty = rank_all(exec, &[]);
        assert!(empty.is_empty());
    }
}

#[test]
fn example_substream_tables_are_exact() {
    let ranked = rank_all(Exec::Sequential, &example_batch());
    // f1 = {D, C} oriented as u = D, v = C.
    let ld = ranked.rank_of(D, PosQuery::At(2)).unwrap();
    let rd = ranked.rank_of(C, PosQuery::At(2)).unwrap();
    assert_eq!((ld, rd), (2, 0));
    assert_eq!(ranked.substream_edge(D, C, ld, 0).unwrap().0, e(D, F));
    assert_eq!(ranked.substream_edge(D, C, ld, 1).unwrap().0, e(B, D));

    // f1 = {C, E} oriented as u = C, v = E; an edge from earlier batches.
    let ld = ranked.rank_of(C, PosQuery::Old).unwrap();
    let rd = ranked.rank_of(E, PosQuery::Old).unwrap();
    assert_eq!((ld, rd), (2, 1));
    assert_eq!(ranked.substream_edge(C, E, ld, 0).unwrap().0, e(C, D));
    assert_eq!(ranked.substream_edge(C, E, ld, 1).unwrap().0, e(C, B));
    assert_eq!(ranked.substream_edge(C, E, ld, 2).unwrap().0, e(E, F));
    assert!(matches!(
        ranked.substream_edge(C, E, ld, 3),
        Err(RankQueryError::MissingRank { .. })
    ));

    // Batched resolution matches the single-query path.
    let queries = vec![
        SubstreamQuery { u: D, v: C, ld_u: 2, phi: 0 },
        SubstreamQuery { u: D, v: C, ld_u: 2, phi: 1 },
        SubstreamQuery { u: C, v: E, ld_u: 2, phi: 2 },
    ];
    for exec in BOTH {
        let got = ranked.substream_edges(exec, &queries).unwrap();
        assert_eq!(
            got.iter().map(|g| g.0).collect::<Vec<_>>(),
            vec![e(D, F), e(B, D), e(E, F)]
        );
    }
}

fn random_batch(n_vertices: u64, size: usize, seed: u64) -> Vec<Edge> {
    assert!(size as u64 <= n_vertices * (n_vertices - 1) / 2, "not enough vertex pairs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let a = rng.gen_range(0..n_vertices);
        let b = rng.gen_range(0..n_vertices);
        if a == b {
            continue;
        }
        let edge = e(a, b);
        if seen.insert(edge) {
            out.push(edge);
        }
    }
    out
}

/// Quadratic rank oracle straight from the definition.
fn naive_rank(w: &[Edge], x: VertexId, y: VertexId) -> u64 {
    if let Some(i) = w.iter().position(|edge| *edge == e(x, y)) {
        w[i + 1..].iter().filter(|edge| edge.contains(x)).count() as u64
    } else {
        w.iter().filter(|edge| edge.contains(x)).count() as u64
    }
}

#[test]
fn ranks_match_naive_counting_oracle() {
    let w = random_batch(120, 1000, 21);
    for exec in BOTH {
        let ranked = rank_all(exec, &w);
        for arc in ranked.by_src_pos_desc() {
            assert_eq!(arc.rank as u64, naive_rank(&w, arc.src, arc.dst));
            assert_eq!(w[arc.pos as usize - 1], e(arc.src, arc.dst));
        }
    }
}

#[test]
fn rank_order_observation_holds() {
    // Sorted by (src, pos desc), ranks restart at 0 on each src boundary
    // and increase by one inside a group; so the same array is also
    // sorted by (src, rank asc).
    let w = random_batch(40, 400, 5);
    let ranked = rank_all(Exec::Parallel, &w);
    let arcs = ranked.by_src_pos_desc();
    for i in 1..arcs.len() {
        if arcs[i - 1].src == arcs[i].src {
            assert!(arcs[i - 1].pos > arcs[i].pos);
            assert_eq!(arcs[i].rank, arcs[i - 1].rank + 1);
        } else {
            assert!(arcs[i - 1].src < arcs[i].src);
            assert_eq!(arcs[i].rank, 0);
        }
    }
    assert_eq!(ranked.by_src_rank_asc().as_ptr(), arcs.as_ptr());
}

#[test]
fn chi_plus_identity_and_substream_bijection() {
    // rank(u -> v) + rank(v -> u) equals the size of the batch
    // neighborhood, and the naming map enumerates it bijectively.
    for seed in 0..5 {
        let w = random_batch(18, 60, seed);
        let ranked = rank_all(Exec::Sequential, &w);
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
        // Batch edges in both orientations plus some non-edge pairs.
        for edge in &w {
            let (u, v) = edge.endpoints();
            pairs.push((u, v));
            pairs.push((v, u));
        }
        pairs.push((0, 17));
        pairs.push((99, 3));
        for (u, v) in pairs {
            let in_batch = w.iter().position(|edge| *edge == e(u, v));
            let q = |_: VertexId| match in_batch {
                Some(i) => PosQuery::At(i as u32 + 1),
                None => PosQuery::Old,
            };
            let ld = ranked.rank_of(u, q(u)).unwrap_or(0);
            let rd = ranked.rank_of(v, q(v)).unwrap_or(0);
            let expected: Vec<Edge> = match in_batch {
                Some(i) => w[i + 1..].iter().copied().filter(|x| x.adjacent_to(e(u, v))).collect(),
                None => w
                    .iter()
                    .copied()
                    .filter(|x| x.contains(u) || x.contains(v))
                    .collect(),
            };
            let chi_plus = ld + rd;
            assert_eq!(chi_plus as usize, expected.len(), "pair ({u},{v}) seed {seed}");
            let mut named: Vec<Edge> = (0..chi_plus)
                .map(|phi| ranked.substream_edge(u, v, ld, phi).unwrap().0)
                .collect();
            named.sort_unstable();
            let mut expected = expected;
            expected.sort_unstable();
            assert_eq!(named, expected, "pair ({u},{v}) seed {seed}");
        }
    }
}

#[test]
fn closing_index_examples() {
    for exec in BOTH {
        let ix = build_closing_index(exec, &example_batch());
        assert_eq!(ix.len(), 5);
        let got = ix.lookup(exec, &[e(B, C), e(A, B), e(D, F)]);
        assert_eq!(got, vec![Some(1), None, Some(5)]);

        let empty = build_closing_index(exec, &[]);
        assert!(empty.is_empty());
        assert_eq!(empty.lookup(exec, &[e(1, 2)]), vec![None]);
    }
}

#[test]
fn closing_index_matches_set_oracle_in_both_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let widen = |edge: Edge, wide: bool| {
        let (u, v) = edge.endpoints();
        if wide {
            e(u + (1 << 40), v + (1 << 40))
        } else {
            edge
        }
    };
    for wide in [false, true] {
        let w: Vec<Edge> = random_batch(60, 1000, 33).iter().map(|&x| widen(x, wide)).collect();
        let index: std::collections::HashMap<Edge, u32> =
            w.iter().enumerate().map(|(i, &x)| (x, i as u32 + 1)).collect();
        let queries: Vec<Edge> = (0..1000)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    w[rng.gen_range(0..w.len())]
                } else {
                    widen(e(rng.gen_range(0..60), 60 + rng.gen_range(0..8)), rng.gen_bool(0.5))
                }
            })
            .collect();
        let oracle: Vec<Option<u32>> = queries.iter().map(|q| index.get(q).copied()).collect();
        for exec in BOTH {
            let ix = build_closing_index(exec, &w);
            assert_eq!(ix.lookup(exec, &queries), oracle, "wide={wide}");
        }
    }
}
