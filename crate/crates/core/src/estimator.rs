//! Estimator state for neighborhood sampling.
//!
//! An estimator holds a level-1 edge sampled uniformly from the stream, a
//! level-2 edge sampled uniformly from the edges incident on the level-1
//! edge that arrived after it, the count `chi` of such later neighbors,
//! and, when present, the closing edge that completes the wedge into a
//! triangle. [`coarse_estimate`] turns one estimator into an unbiased
//! (high-variance) triangle-count estimate; aggregation across many
//! estimators happens in [`crate::aggregate`].

use thiserror::Error;

/// Vertex identifier. Opaque: no contiguity or density is assumed.
pub type VertexId = u64;

/// An undirected edge, stored normalized with the smaller endpoint first.
/// Self-loops are unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
}

/// Error for attempts to build a degenerate edge.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("self-loop at vertex {0} is not a valid edge")]
pub struct SelfLoop(pub VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Result<Edge, SelfLoop> {
        if a == b {
            return Err(SelfLoop(a));
        }
        Ok(if a < b { Edge { u: a, v: b } } else { Edge { u: b, v: a } })
    }

    /// Endpoints in normalized order (`small, large`).
    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }

    pub fn small(self) -> VertexId {
        self.u
    }

    pub fn large(self) -> VertexId {
        self.v
    }

    pub fn contains(self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    /// True when the two edges share exactly one endpoint.
    pub fn adjacent_to(self, other: Edge) -> bool {
        self != other && (other.contains(self.u) || other.contains(self.v))
    }

    /// The unique edge completing the triangle over `self` and an adjacent
    /// `other`; `None` when the edges are not adjacent.
    pub fn closing_candidate(self, other: Edge) -> Option<Edge> {
        if !self.adjacent_to(other) {
            return None;
        }
        let shared = if other.contains(self.u) { self.u } else { self.v };
        let a = if self.u == shared { self.v } else { self.u };
        let b = if other.u == shared { other.v } else { other.u };
        Edge::new(a, b).ok()
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}, {}}}", self.u, self.v)
    }
}

/// One neighborhood-sampling estimator.
///
/// Batch-local positions record where `f1`/`f2` landed inside the batch
/// currently being processed; they are invalidated when the batch update
/// finishes, so snapshots taken between batches always read `None` there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Estimator {
    /// Level-1 edge: a uniform sample of the stream so far.
    pub f1: Option<Edge>,
    /// Level-2 edge: a uniform sample of the later neighbors of `f1`.
    pub f2: Option<Edge>,
    /// Closing edge of the `f1`-`f2` wedge, when it has arrived after `f2`.
    pub f3: Option<Edge>,
    /// Number of stream edges incident on `f1` arriving after it.
    pub chi: u64,
    /// Batch position of `f1` if it was replaced in the current batch.
    pub f1_batch_pos: Option<u32>,
    /// Batch position of `f2` if it was replaced in the current batch.
    pub f2_batch_pos: Option<u32>,
}

impl Estimator {
    /// A fresh estimator: all edges empty, `chi = 0`, positions stale.
    pub fn new() -> Estimator {
        Estimator::default()
    }
}

/// The coarse unbiased estimate contributed by one estimator: zero when no
/// closing edge is present, `chi * m` otherwise, where `m` is the number of
/// edges seen so far. Exact in integer arithmetic.
pub fn coarse_estimate(e: &Estimator, m: u64) -> u128 {
    if e.f3.is_some() {
        e.chi as u128 * m as u128
    } else {
        0
    }
}

/// Global stream progress: edges and batches ingested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamState {
    pub m_seen: u64,
    pub batches_seen: u64,
}

/// A violated deterministic clause of the sampling state contract, with
/// enough context to debug the offending estimator.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NbsiViolation {
    #[error("chi = {chi} and level-2/3 edges must be absent when f1 is empty")]
    NonEmptyStateWithoutF1 { chi: u64 },
    #[error("level-1 edge {f1} does not appear in the stream")]
    F1NotInStream { f1: Edge },
    #[error("chi = {found} but f1 = {f1} has {expected} later incident edges")]
    ChiMismatch { f1: Edge, expected: u64, found: u64 },
    #[error("f2 must be set exactly when chi > 0 (chi = {chi}, f2 set: {f2_set})")]
    F2PresenceMismatch { chi: u64, f2_set: bool },
    #[error("closing edge {f3} recorded without a level-2 edge")]
    F3WithoutF2 { f3: Edge },
    #[error("level-2 edge {f2} is not a later neighbor of f1 = {f1}")]
    F2NotInNeighborhood { f1: Edge, f2: Edge },
    #[error("f3 = {f3:?} but the closing edge for {f1}, {f2} after f2 is {expected:?}")]
    F3Mismatch { f1: Edge, f2: Edge, expected: Option<Edge>, f3: Option<Edge> },
}

/// Checks the deterministic clauses of the sampling state contract for one
/// estimator against the full ordered stream: `chi` counts the later
/// neighbors of `f1` exactly, `f2` is one of them exactly when there are
/// any, and `f3` is the closing edge iff it appears after `f2`.
///
/// Uniformity of the `f1`/`f2` choices is a statistical property and is
/// checked by distribution tests, not here. The stream must be free of
/// duplicates.
///
/// Test support: this recomputes neighborhoods by brute force,
/// independently of the batch-update machinery it is used to check.
pub fn validate_nbsi(e: &Estimator, stream: &[Edge]) -> Result<(), NbsiViolation> {
    let f1 = match e.f1 {
        None => {
            if e.chi != 0 || e.f2.is_some() || e.f3.is_some() {
                return Err(NbsiViolation::NonEmptyStateWithoutF1 { chi: e.chi });
            }
            return Ok(());
        }
        Some(f1) => f1,
    };
    let f1_idx = match stream.iter().position(|&x| x == f1) {
        None => return Err(NbsiViolation::F1NotInStream { f1 }),
        Some(i) => i,
    };
    let neighborhood: Vec<(usize, Edge)> = stream
        .iter()
        .enumerate()
        .skip(f1_idx + 1)
        .filter(|(_, &x)| x.adjacent_to(f1))
        .map(|(i, &x)| (i, x))
        .collect();
    if e.chi != neighborhood.len() as u64 {
        return Err(NbsiViolation::ChiMismatch {
            f1,
            expected: neighborhood.len() as u64,
            found: e.chi,
        });
    }
    let f2 = match e.f2 {
        None if e.chi == 0 => {
            if let Some(f3) = e.f3 {
                return Err(NbsiViolation::F3WithoutF2 { f3 });
            }
            return Ok(());
        }
        Some(f2) if e.chi > 0 => f2,
        _ => return Err(NbsiViolation::F2PresenceMismatch { chi: e.chi, f2_set: e.f2.is_some() }),
    };
    let f2_idx = match neighborhood.iter().find(|(_, x)| *x == f2) {
        None => return Err(NbsiViolation::F2NotInNeighborhood { f1, f2 }),
        Some((i, _)) => *i,
    };
    let candidate = f1.closing_candidate(f2).expect("adjacent by the check above");
    let expected = stream
        .iter()
        .skip(f2_idx + 1)
        .any(|&x| x == candidate)
        .then_some(candidate);
    if e.f3 != expected {
        return Err(NbsiViolation::F3Mismatch { f1, f2, expected, f3: e.f3 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: u64, b: u64) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn edge_normalizes_and_rejects_self_loops() {
        assert_eq!(e(5, 2).endpoints(), (2, 5));
        assert_eq!(Edge::new(3, 3), Err(SelfLoop(3)));
    }

    #[test]
    fn closing_candidate_is_the_symmetric_difference() {
        assert_eq!(e(1, 2).closing_candidate(e(2, 3)), Some(e(1, 3)));
        assert_eq!(e(1, 2).closing_candidate(e(3, 4)), None);
        assert_eq!(e(1, 2).closing_candidate(e(1, 2)), None);
    }

    #[test]
    fn new_estimator_is_empty_and_estimates_zero() {
        let est = Estimator::new();
        assert_eq!(est, Estimator { f1: None, f2: None, f3: None, chi: 0, f1_batch_pos: None, f2_batch_pos: None });
        assert_eq!(validate_nbsi(&est, &[]), Ok(()));
        assert_eq!(coarse_estimate(&est, 0), 0);
    }

    #[test]
    fn coarse_estimate_examples() {
        let mut est = Estimator { f1: Some(e(1, 2)), chi: 5, ..Estimator::default() };
        assert_eq!(coarse_estimate(&est, 100), 0);
        est.chi = 2;
        est.f2 = Some(e(2, 3));
        est.f3 = Some(e(1, 3));
        assert_eq!(coarse_estimate(&est, 3), 6);
    }

    #[test]
    fn validate_catches_chi_off_by_one() {
        let stream = [e(1, 2), e(2, 3), e(1, 3)];
        let good = Estimator {
            f1: Some(e(1, 2)),
            f2: Some(e(2, 3)),
            f3: Some(e(1, 3)),
            chi: 2,
            ..Estimator::default()
        };
        assert_eq!(validate_nbsi(&good, &stream), Ok(()));
        let off = Estimator { chi: 3, ..good };
        assert!(matches!(
            validate_nbsi(&off, &stream),
            Err(NbsiViolation::ChiMismatch { expected: 2, found: 3, .. })
        ));
    }

    #[test]
    fn validate_catches_non_adjacent_f2() {
        let stream = [e(1, 2), e(2, 3), e(4, 5), e(1, 3)];
        let bad = Estimator {
            f1: Some(e(1, 2)),
            f2: Some(e(4, 5)),
            f3: None,
            chi: 2,
            ..Estimator::default()
        };
        assert!(matches!(
            validate_nbsi(&bad, &stream),
            Err(NbsiViolation::F2NotInNeighborhood { .. })
        ));
    }

    #[test]
    fn validate_catches_missing_f1_and_wrong_f3() {
        let stream = [e(1, 2), e(2, 3), e(1, 3)];
        let missing = Estimator { f1: Some(e(7, 8)), chi: 0, ..Estimator::default() };
        assert!(matches!(validate_nbsi(&missing, &stream), Err(NbsiViolation::F1NotInStream { .. })));

        // Closing edge {1,3} arrives after f2, so f3 = None is a violation.
        let sleepy = Estimator {
            f1: Some(e(1, 2)),
            f2: Some(e(2, 3)),
            f3: None,
            chi: 2,
            ..Estimator::default()
        };
        assert!(matches!(validate_nbsi(&sleepy, &stream), Err(NbsiViolation::F3Mismatch { .. })));

        // And with the closing edge arriving before f2, f3 must stay empty.
        let stream2 = [e(1, 2), e(1, 3), e(2, 3)];
        let eager = Estimator {
            f1: Some(e(1, 2)),
            f2: Some(e(2, 3)),
            f3: Some(e(1, 3)),
            chi: 2,
            ..Estimator::default()
        };
        assert!(matches!(validate_nbsi(&eager, &stream2), Err(NbsiViolation::F3Mismatch { .. })));
        let patient = Estimator { f3: None, ..eager };
        assert_eq!(validate_nbsi(&patient, &stream2), Ok(()));
    }
}
