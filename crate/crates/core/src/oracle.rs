//! Brute-force ground truth for tests and accuracy reporting.
//!
//! Deliberately simple and unhurried: exact triangle counting by sorted
//! adjacency intersection (roughly `O(sum of deg(u) * deg(v) over edges)`,
//! fine up to around ten million edges), edge neighborhoods by linear
//! scans, and per-triangle discovery weights. Everything here is
//! independent of the batch-update machinery it is used to check.

use std::collections::HashMap;

use thiserror::Error;

use crate::estimator::{Edge, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("duplicate edge {0} in stream")]
    DuplicateEdge(Edge),
    #[error("edge {0} not found in stream")]
    EdgeNotFound(Edge),
    #[error("vertices {0:?} do not form a triangle of the graph")]
    InvalidTriangle([VertexId; 3]),
}

/// A simple graph together with the total order its stream imposes on the
/// edges (the sequence order).
#[derive(Debug, Clone)]
pub struct OrderedGraph {
    edges: Vec<Edge>,
    position: HashMap<Edge, usize>,
    adjacency: HashMap<VertexId, Vec<VertexId>>,
}

impl OrderedGraph {
    /// Builds the graph from edges in stream order. Duplicates are
    /// rejected; self-loops are unrepresentable in [`Edge`].
    pub fn from_edges(edges: Vec<Edge>) -> Result<OrderedGraph, OracleError> {
        let mut position = HashMap::with_capacity(edges.len());
        let mut adjacency: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for (i, &e) in edges.iter().enumerate() {
            if position.insert(e, i).is_some() {
                return Err(OracleError::DuplicateEdge(e));
            }
            let (u, v) = e.endpoints();
            adjacency.entry(u).or_default().push(v);
            adjacency.entry(v).or_default().push(u);
        }
        for list in adjacency.values_mut() {
            list.sort_unstable();
        }
        Ok(OrderedGraph { edges, position, adjacency })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn max_degree(&self) -> u64 {
        self.adjacency.values().map(|l| l.len() as u64).max().unwrap_or(0)
    }

    /// Exact number of triangles, by intersecting the sorted adjacency
    /// lists of each edge's endpoints and counting each triangle at its
    /// largest vertex. Independent of stream order.
    pub fn exact_triangle_count(&self) -> u64 {
        let mut count = 0u64;
        for e in &self.edges {
            let (u, v) = e.endpoints();
            count += intersect_above(&self.adjacency[&u], &self.adjacency[&v], u.max(v))
                .count() as u64;
        }
        count
    }

    /// All triangles, each listed once with sorted vertices.
    pub fn triangles(&self) -> Vec<[VertexId; 3]> {
        let mut out = Vec::new();
        for e in &self.edges {
            let (u, v) = e.endpoints();
            for w in intersect_above(&self.adjacency[&u], &self.adjacency[&v], v) {
                out.push([u, v, w]);
            }
        }
        out.sort_unstable();
        out
    }

    /// The edges incident on `f` that appear strictly after it in stream
    /// order, in stream order.
    pub fn neighborhood_after(&self, f: Edge) -> Result<Vec<Edge>, OracleError> {
        let start = *self.position.get(&f).ok_or(OracleError::EdgeNotFound(f))?;
        Ok(self.edges[start + 1..]
            .iter()
            .copied()
            .filter(|x| x.adjacent_to(f))
            .collect())
    }

    /// The three edges of a triangle in stream order.
    fn triangle_edges(&self, t: [VertexId; 3]) -> Result<[Edge; 3], OracleError> {
        let [a, b, c] = t;
        if a == b || b == c || a == c {
            return Err(OracleError::InvalidTriangle(t));
        }
        let mk = |x, y| Edge::new(x, y).expect("distinct by the check above");
        let mut edges = [mk(a, b), mk(b, c), mk(a, c)];
        for e in edges {
            if !self.position.contains_key(&e) {
                return Err(OracleError::InvalidTriangle(t));
            }
        }
        edges.sort_by_key(|e| self.position[e]);
        Ok(edges)
    }

    /// The later-neighborhood size of the triangle's earliest edge; the
    /// denominator of the triangle's discovery probability.
    pub fn triangle_weight(&self, t: [VertexId; 3]) -> Result<u64, OracleError> {
        let first = self.triangle_edges(t)?[0];
        Ok(self.neighborhood_after(first)?.len() as u64)
    }

    /// Probability that a single estimator ends up holding exactly this
    /// triangle: `1 / (m * triangle_weight)`.
    pub fn discovery_probability(&self, t: [VertexId; 3]) -> Result<f64, OracleError> {
        let c = self.triangle_weight(t)?;
        Ok(1.0 / (self.edge_count() as f64 * c as f64))
    }
}

/// Members of both sorted lists that are strictly greater than `floor`.
fn intersect_above<'a>(
    a: &'a [VertexId],
    b: &'a [VertexId],
    floor: VertexId,
) -> impl Iterator<Item = VertexId> + 'a {
    let mut i = a.partition_point(|&x| x <= floor);
    let mut j = b.partition_point(|&x| x <= floor);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let w = a[i];
                    i += 1;
                    j += 1;
                    return Some(w);
                }
            }
        }
        None
    })
}
