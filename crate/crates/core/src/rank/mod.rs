//! Per-batch rank and position index over the arriving edges.
//!
//! Each batch edge `{u, v}` at position `pos` yields two oriented arcs,
//! `u -> v` and `v -> u`. The rank of an arc counts the later batch edges
//! incident on its source, and for a vertex paired with no batch edge the
//! degree within the batch takes the rank's place. Ranks give every
//! estimator an implicit, contiguous naming of its candidate level-2 edges
//! `0..chi_plus`, so sampling one of them is a single indexed lookup
//! instead of a walk over a materialized substream.
//!
//! The index is built once per batch with a sort and a prefix count, then
//! answered in bulk: all estimator queries of one kind are resolved with a
//! single presorted multisearch over the arc array.

use thiserror::Error;

use crate::estimator::{Edge, VertexId};
use crate::exec::{tabulate, Exec};
use crate::primitives as prim;
use crate::util::SmallKeyTable;

/// Arc-count threshold below which the batch structures are small enough
/// to stay cache-resident; bulk queries then resolve directly per query
/// instead of sorting the query keys first. Same outputs either way.
const DIRECT_LOOKUP_MAX: usize = 1 << 15;

/// One oriented arc of a batch edge, with its batch position and rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedArc {
    pub src: VertexId,
    pub dst: VertexId,
    /// 1-based position of the undirected edge within the batch.
    pub pos: u32,
    /// Count of batch edges incident on `src` with a larger position.
    pub rank: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GroupRef {
    start: u32,
    len: u32,
}

/// A query position: a concrete batch position for an edge replaced in
/// this batch, or the sentinel for level-1 edges from earlier batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosQuery {
    At(u32),
    Old,
}

/// One batched substream-name resolution: for a level-1 edge `{u, v}`
/// with `ld = rank(u -> v)`, name `phi` in `0..chi_plus` selects the arc
/// `(u, rank = phi)` when `phi < ld` and `(v, rank = phi - ld)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubstreamQuery {
    pub u: VertexId,
    pub v: VertexId,
    pub ld_u: u64,
    pub phi: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankQueryError {
    #[error("no arc with src {src} at batch position {pos}; rank index inconsistent with caller state")]
    MissingArc { src: VertexId, pos: u32 },
    #[error("no arc with src {src} and rank {rank}; substream name out of range")]
    MissingRank { src: VertexId, rank: u64 },
}

/// The rank index of one batch: all `2|W|` ranked arcs ordered by
/// `(src asc, pos desc)`, plus a directory of per-source groups (and, for
/// small batches, a cache-resident table over the same directory).
pub struct RankedArcs {
    arcs: Vec<RankedArc>,
    directory: prim::KeyValueSeq<VertexId, GroupRef>,
    table: Option<SmallKeyTable<GroupRef>>,
}

/// Builds the rank index for a batch.
///
/// The arcs are materialized in descending position order, stably sorted
/// by source, and ranked with a prefix count that resets at each source
/// boundary. Within a source group the positions then descend and the
/// ranks ascend from zero, which is exactly why one array serves both the
/// position-keyed and the rank-keyed lookups.
pub fn rank_all(exec: Exec, w: &[Edge]) -> RankedArcs {
    let s = w.len();
    assert!(s < u32::MAX as usize, "batch too large for 32-bit positions");
    // Two oriented arcs per edge, emitted with positions descending so the
    // stable sort by source leaves each group in descending-position order.
    let unranked: Vec<(VertexId, VertexId, u32)> = tabulate(exec, 2 * s, |k| {
        let j = s - 1 - k / 2;
        let (u, v) = w[j].endpoints();
        let pos = (j + 1) as u32;
        if k % 2 == 0 {
            (u, v, pos)
        } else {
            (v, u, pos)
        }
    });
    let sorted = prim::sort_by_u64_key(exec, &unranked, |a| a.0);

    // Rank: zero at each source boundary, incrementing within the group.
    let marks: Vec<prim::Mark> = tabulate(exec, sorted.len(), |i| {
        if i == 0 || sorted[i - 1].0 != sorted[i].0 {
            prim::Mark::Reset
        } else {
            prim::Mark::One
        }
    });
    // The prefix count reads off the accumulator *before* each element, so
    // a trailing dummy shifts the window to read it *after* instead.
    let shifted = prim::scan_with_resets(exec, &prim::concat(&marks, &[prim::Mark::One]));
    let ranks = &shifted[1..];

    let arcs: Vec<RankedArc> = tabulate(exec, sorted.len(), |i| RankedArc {
        src: sorted[i].0,
        dst: sorted[i].1,
        pos: sorted[i].2,
        rank: ranks[i] as u32,
    });

    // Group directory: one entry per distinct source, in source order.
    let starts: Vec<u32> = marks
        .iter()
        .enumerate()
        .filter(|(_, m)| **m == prim::Mark::Reset)
        .map(|(i, _)| i as u32)
        .collect();
    let directory = prim::KeyValueSeq::from_sorted(
        tabulate(exec, starts.len(), |g| {
            let start = starts[g];
            let end = starts.get(g + 1).copied().unwrap_or(arcs.len() as u32);
            (arcs[start as usize].src, GroupRef { start, len: end - start })
        }),
    );
    let table =
        (arcs.len() <= DIRECT_LOOKUP_MAX).then(|| SmallKeyTable::build(directory.pairs()));
    RankedArcs { arcs, directory, table }
}

impl RankedArcs {
    /// All arcs, ordered by `(src asc, pos desc)`.
    pub fn by_src_pos_desc(&self) -> &[RankedArc] {
        &self.arcs
    }

    /// All arcs, ordered by `(src asc, rank asc)`. This is the same array:
    /// the two orders coincide by construction.
    pub fn by_src_rank_asc(&self) -> &[RankedArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    fn group(&self, src: VertexId) -> Option<GroupRef> {
        let dir = self.directory.pairs();
        dir.binary_search_by_key(&src, |p| p.0).ok().map(|i| dir[i].1)
    }

    fn group_slice(&self, g: GroupRef) -> &[RankedArc] {
        &self.arcs[g.start as usize..(g.start + g.len) as usize]
    }

    /// Outgoing-rank lookup for one `(vertex, position)` pair.
    ///
    /// With a concrete position this returns the rank of that arc, i.e.
    /// the count of later batch edges incident on `src`. With [`PosQuery::Old`]
    /// it returns the batch degree of `src` (one more than the rank of its
    /// last arc), or zero when the vertex is untouched by the batch.
    pub fn rank_of(&self, src: VertexId, pos: PosQuery) -> Result<u64, RankQueryError> {
        match (self.group(src), pos) {
            (None, PosQuery::Old) => Ok(0),
            (None, PosQuery::At(p)) => Err(RankQueryError::MissingArc { src, pos: p }),
            (Some(g), PosQuery::Old) => Ok(g.len as u64),
            (Some(g), PosQuery::At(p)) => {
                let slice = self.group_slice(g);
                let i = slice.partition_point(|a| a.pos > p);
                if i < slice.len() && slice[i].pos == p {
                    Ok(slice[i].rank as u64)
                } else {
                    Err(RankQueryError::MissingArc { src, pos: p })
                }
            }
        }
    }

    /// Bulk outgoing-rank lookup: one radix sort of the query keys and one
    /// presorted multisearch over the group directory answer all queries.
    pub fn query_rank_outgoing(
        &self,
        exec: Exec,
        queries: &[(VertexId, PosQuery)],
    ) -> Result<Vec<u64>, RankQueryError> {
        const FAULT: u64 = u64::MAX; // ranks are bounded by 2|W|, so this is free
        if let Some(table) = &self.table {
            let any_fault = std::sync::atomic::AtomicBool::new(false);
            let out = tabulate(exec, queries.len(), |i| {
                self.resolve_rank(table.get(queries[i].0), queries[i].1).unwrap_or_else(|| {
                    any_fault.store(true, std::sync::atomic::Ordering::Relaxed);
                    FAULT
                })
            });
            if any_fault.load(std::sync::atomic::Ordering::Relaxed) {
                return Err(self.first_rank_fault(queries));
            }
            return Ok(out);
        }
        // The position rides along with the key so the resolve pass reads
        // records in sorted order only.
        let tagged: Vec<(u64, PosQuery, u32)> =
            tabulate(exec, queries.len(), |i| (queries[i].0, queries[i].1, i as u32));
        let tagged = prim::sort_by_u64_key(exec, &tagged, |p| p.0);
        let keys: Vec<u64> = prim::map(exec, &tagged, |p| p.0);
        let groups = prim::exact_multisearch_presorted(exec, &self.directory, &keys);

        let any_fault = std::sync::atomic::AtomicBool::new(false);
        let mut out = vec![0u64; queries.len()];
        prim::scatter_from(exec, &mut out, tagged.len(), |j| {
            let (_, pos, orig) = tagged[j];
            let answer = self
                .resolve_rank(groups[j].map(|g| g.1), pos)
                .unwrap_or_else(|| {
                    any_fault.store(true, std::sync::atomic::Ordering::Relaxed);
                    FAULT
                });
            (orig as usize, answer)
        });
        if any_fault.load(std::sync::atomic::Ordering::Relaxed) {
            return Err(self.first_rank_fault(queries));
        }
        Ok(out)
    }

    /// Rare path: recover the first offending query for the error report.
    fn first_rank_fault(&self, queries: &[(VertexId, PosQuery)]) -> RankQueryError {
        for &(src, pos) in queries {
            if let PosQuery::At(p) = pos {
                if self.rank_of(src, pos).is_err() {
                    return RankQueryError::MissingArc { src, pos: p };
                }
            }
        }
        unreachable!("fault flagged but no offending query found");
    }

    fn resolve_rank(&self, group: Option<GroupRef>, pos: PosQuery) -> Option<u64> {
        match (group, pos) {
            (None, PosQuery::Old) => Some(0),
            (None, PosQuery::At(_)) => None,
            (Some(g), PosQuery::Old) => Some(g.len as u64),
            (Some(g), PosQuery::At(p)) => {
                let slice = self.group_slice(g);
                let i = slice.partition_point(|a| a.pos > p);
                (i < slice.len() && slice[i].pos == p).then(|| slice[i].rank as u64)
            }
        }
    }

    /// Resolves one substream name to its batch edge and position.
    pub fn substream_edge(
        &self,
        u: VertexId,
        v: VertexId,
        ld_u: u64,
        phi: u64,
    ) -> Result<(Edge, u32), RankQueryError> {
        let (src, rank) = if phi < ld_u { (u, phi) } else { (v, phi - ld_u) };
        let g = self.group(src).ok_or(RankQueryError::MissingRank { src, rank })?;
        if rank >= g.len as u64 {
            return Err(RankQueryError::MissingRank { src, rank });
        }
        let arc = self.arcs[g.start as usize + rank as usize];
        debug_assert_eq!(arc.rank as u64, rank);
        let edge = Edge::new(arc.src, arc.dst).expect("arcs never have equal endpoints");
        Ok((edge, arc.pos))
    }

    fn resolve_substream(
        &self,
        group: Option<GroupRef>,
        rank: u64,
    ) -> Option<(Edge, u32)> {
        match group {
            Some(g) if rank < g.len as u64 => {
                let arc = self.arcs[g.start as usize + rank as usize];
                debug_assert_eq!(arc.rank as u64, rank);
                let edge = Edge::new(arc.src, arc.dst).expect("arcs never have equal endpoints");
                Some((edge, arc.pos))
            }
            _ => None,
        }
    }

    /// Bulk substream-name resolution, mirroring [`query_rank_outgoing`].
    pub fn substream_edges(
        &self,
        exec: Exec,
        queries: &[SubstreamQuery],
    ) -> Result<Vec<(Edge, u32)>, RankQueryError> {
        if let Some(table) = &self.table {
            let any_fault = std::sync::atomic::AtomicBool::new(false);
            let placeholder = (Edge::new(0, 1).unwrap(), 0u32);
            let out = tabulate(exec, queries.len(), |i| {
                let q = queries[i];
                let (src, rank) =
                    if q.phi < q.ld_u { (q.u, q.phi) } else { (q.v, q.phi - q.ld_u) };
                self.resolve_substream(table.get(src), rank).unwrap_or_else(|| {
                    any_fault.store(true, std::sync::atomic::Ordering::Relaxed);
                    placeholder
                })
            });
            if any_fault.load(std::sync::atomic::Ordering::Relaxed) {
                return Err(self.first_substream_fault(queries));
            }
            return Ok(out);
        }
        let tagged: Vec<(u64, u64, u32)> = tabulate(exec, queries.len(), |i| {
            let q = queries[i];
            let (src, rank) =
                if q.phi < q.ld_u { (q.u, q.phi) } else { (q.v, q.phi - q.ld_u) };
            (src, rank, i as u32)
        });
        let tagged = prim::sort_by_u64_key(exec, &tagged, |p| p.0);
        let keys: Vec<u64> = prim::map(exec, &tagged, |p| p.0);
        let groups = prim::exact_multisearch_presorted(exec, &self.directory, &keys);

        let any_fault = std::sync::atomic::AtomicBool::new(false);
        let placeholder = (Edge::new(0, 1).unwrap(), 0u32);
        let mut out = vec![placeholder; queries.len()];
        prim::scatter_from(exec, &mut out, tagged.len(), |j| {
            let (_, rank, orig) = tagged[j];
            let answer = self.resolve_substream(groups[j].map(|g| g.1), rank).unwrap_or_else(
                || {
                    any_fault.store(true, std::sync::atomic::Ordering::Relaxed);
                    placeholder
                },
            );
            (orig as usize, answer)
        });
        if any_fault.load(std::sync::atomic::Ordering::Relaxed) {
            return Err(self.first_substream_fault(queries));
        }
        Ok(out)
    }

    fn first_substream_fault(&self, queries: &[SubstreamQuery]) -> RankQueryError {
        for q in queries {
            if let Err(e) = self.substream_edge(q.u, q.v, q.ld_u, q.phi) {
                return e;
            }
        }
        unreachable!("fault flagged but no offending query found");
    }
}

/// Batch membership index for closing-edge detection: one record per batch
/// edge, keyed by its normalized endpoints, sorted for multisearch.
///
/// When every vertex id in the batch fits in 32 bits the key is packed
/// into one `u64` so lookups ride the radix fast path; the packed and wide
/// layouts answer identically.
pub struct ClosingIndex {
    keys: ClosingKeys,
    table: Option<SmallKeyTable<u32>>,
}

enum ClosingKeys {
    Packed(prim::KeyValueSeq<u64, u32>),
    Wide(prim::KeyValueSeq<(VertexId, VertexId), u32>),
}

const PACK_LIMIT: VertexId = 1 << 32;

fn pack(u: VertexId, v: VertexId) -> u64 {
    debug_assert!(u < PACK_LIMIT && v < PACK_LIMIT);
    (u << 32) | v
}

/// Builds the closing-edge index for a batch.
pub fn build_closing_index(exec: Exec, w: &[Edge]) -> ClosingIndex {
    let packable = w.iter().all(|e| e.large() < PACK_LIMIT);
    let (keys, table) = if packable {
        let recs: Vec<(u64, u32)> = tabulate(exec, w.len(), |i| {
            let (u, v) = w[i].endpoints();
            (pack(u, v), (i + 1) as u32)
        });
        let sorted = prim::sort_by_u64_key(exec, &recs, |p| p.0);
        let table = (w.len() <= DIRECT_LOOKUP_MAX).then(|| SmallKeyTable::build(&sorted));
        (ClosingKeys::Packed(prim::KeyValueSeq::from_sorted(sorted)), table)
    } else {
        let recs: Vec<((VertexId, VertexId), u32)> =
            tabulate(exec, w.len(), |i| (w[i].endpoints(), (i + 1) as u32));
        let sorted = prim::sort_by(exec, &recs, |a, b| a.0.cmp(&b.0));
        (ClosingKeys::Wide(prim::KeyValueSeq::from_sorted(sorted)), None)
    };
    ClosingIndex { keys, table }
}

impl ClosingIndex {
    pub fn len(&self) -> usize {
        match &self.keys {
            ClosingKeys::Packed(s) => s.len(),
            ClosingKeys::Wide(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Batch position of each queried edge, if it belongs to the batch.
    pub fn lookup(&self, exec: Exec, queries: &[Edge]) -> Vec<Option<u32>> {
        if let Some(table) = &self.table {
            return tabulate(exec, queries.len(), |i| {
                if queries[i].large() >= PACK_LIMIT {
                    return None;
                }
                let (u, v) = queries[i].endpoints();
                table.get(pack(u, v))
            });
        }
        match &self.keys {
            ClosingKeys::Packed(s) => {
                // Edges with oversized endpoints cannot be in a packed
                // batch; they resolve to None without a search.
                let keep = |(i, e): (usize, &Edge)| {
                    (e.large() < PACK_LIMIT).then(|| {
                        let (u, v) = e.endpoints();
                        (pack(u, v), i as u32)
                    })
                };
                let tagged: Vec<(u64, u32)> = match exec {
                    Exec::Sequential => queries.iter().enumerate().filter_map(keep).collect(),
                    Exec::Parallel => {
                        use rayon::prelude::*;
                        queries.par_iter().enumerate().filter_map(keep).collect()
                    }
                };
                let tagged = prim::sort_by_u64_key(exec, &tagged, |p| p.0);
                let keys: Vec<u64> = prim::map(exec, &tagged, |p| p.0);
                let found = prim::exact_multisearch_presorted(exec, s, &keys);
                let mut out = vec![None; queries.len()];
                prim::scatter_from(exec, &mut out, tagged.len(), |j| {
                    (tagged[j].1 as usize, found[j].map(|(_, pos)| pos))
                });
                out
            }
            ClosingKeys::Wide(s) => {
                let keys: Vec<(VertexId, VertexId)> =
                    prim::map(exec, queries, |e| e.endpoints());
                let found = prim::exact_multisearch(exec, s, &keys);
                prim::map(exec, &found, |hit| hit.map(|(_, pos)| pos))
            }
        }
    }
}

#[cfg(test)]
mod tests;
