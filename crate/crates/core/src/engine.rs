//! The coordinated bulk update of all estimators for one arriving batch.
//!
//! Processing a batch `W` takes three steps, each run across every
//! estimator with the shared per-batch structures instead of per-estimator
//! walks:
//!
//! 1. level-1 reservoir step: each estimator keeps its sampled edge or
//!    replaces it with a uniformly chosen batch edge, with probability
//!    `|W| / (|E| + |W|)`;
//! 2. level-2 step: batched rank queries give every estimator the number
//!    `chi_plus` of batch edges incident on its level-1 edge; one draw per
//!    estimator decides between keeping its level-2 edge (probability
//!    `chi_minus / (chi_minus + chi_plus)`) and naming a fresh one through
//!    the rank index; `chi` then grows to `chi_minus + chi_plus`;
//! 3. closing step: estimators holding an open wedge look up the unique
//!    completing edge in the batch index and accept it when it arrived
//!    after the level-2 edge.
//!
//! All random decisions come from a counter-based source addressed by
//! (estimator, batch, draw), so runs are bit-reproducible for a fixed seed
//! regardless of worker count or batch partitioning of the work.

use thiserror::Error;

use crate::aggregate;
use crate::estimator::{Edge, Estimator, StreamState, VertexId};
use crate::exec::{for_each_index, tabulate, Exec};
use crate::primitives as prim;
use crate::rank::{self, PosQuery, RankQueryError, SubstreamQuery};

/// Counter-based pseudo-random decision source.
///
/// Every draw is a pure function of `(seed, estimator, batch, draw index)`;
/// no sequential generator state exists, so the values consumed by one
/// estimator in one batch never depend on scheduling or worker count.
/// Uniform ranges use multiply-shift with rejection, consuming further
/// draw indices on the (astronomically rare) retries, so there is no
/// modulo bias.
#[derive(Debug, Clone, Copy)]
pub struct DecisionSource {
    seed: u64,
}

/// Draw tags: each logical decision within a batch owns a block of draw
/// indices, leaving room for rejection retries.
#[derive(Debug, Clone, Copy)]
pub enum DrawTag {
    Level1 = 0,
    Level2 = 1,
}

const DRAW_BLOCK: u64 = 64;

use crate::util::mix64 as mix;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives an independent engine seed from a base seed and an index
/// (trial number, run number, ...). Pure and collision-resistant enough
/// for any realistic index range.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix(base ^ mix(index.wrapping_mul(GOLDEN) ^ 0x1F83_D9AB_FB41_BD6B))
}

impl DecisionSource {
    pub fn new(seed: u64) -> DecisionSource {
        DecisionSource { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn for_batch(&self, batch: u64) -> BatchDraws {
        BatchDraws { key: mix(self.seed ^ mix(batch.wrapping_mul(GOLDEN) ^ 0xB5AD_4ECE_DA1C_E2A9)) }
    }

    /// Uniform value in `[0, bound)` for the given address.
    pub fn uniform(&self, estimator: u64, batch: u64, tag: DrawTag, bound: u64) -> u64 {
        self.for_batch(batch).uniform(estimator, tag, bound)
    }
}

/// Per-batch handle with the batch component of the address premixed.
#[derive(Clone, Copy)]
pub(crate) struct BatchDraws {
    key: u64,
}

impl BatchDraws {
    #[inline]
    fn word(&self, estimator: u64, idx: u64) -> u64 {
        let k = mix(self.key ^ mix(estimator.wrapping_mul(GOLDEN) ^ 0x94D0_49BB_1331_11EB));
        mix(k.wrapping_add(idx.wrapping_mul(GOLDEN)))
    }

    pub(crate) fn uniform(&self, estimator: u64, tag: DrawTag, bound: u64) -> u64 {
        debug_assert!(bound >= 1);
        let mut idx = tag as u64 * DRAW_BLOCK;
        let mut x = self.word(estimator, idx);
        let mut m = (x as u128) * (bound as u128);
        let mut lo = m as u64;
        if lo < bound {
            let threshold = bound.wrapping_neg() % bound;
            while lo < threshold {
                idx += 1;
                x = self.word(estimator, idx);
                m = (x as u128) * (bound as u128);
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }
}

/// Internal edge slot: a plain pair with an impossible value as "empty",
/// keeping the estimator arrays flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    u: VertexId,
    v: VertexId,
}

const EMPTY: Slot = Slot { u: VertexId::MAX, v: VertexId::MAX };

impl Slot {
    #[inline]
    fn of(e: Edge) -> Slot {
        let (u, v) = e.endpoints();
        Slot { u, v }
    }

    #[inline]
    fn get(self) -> Option<Edge> {
        (self != EMPTY).then(|| Edge::new(self.u, self.v).expect("slots hold valid edges"))
    }

    #[inline]
    fn is_empty(self) -> bool {
        self == EMPTY
    }
}

/// Batch-local freshness stamp: `(batch + 1) << 32 | pos` when the field
/// was set in `batch`, zero otherwise. Decoding against the current batch
/// id makes every stamp from earlier batches read as stale without any
/// end-of-batch clearing pass.
#[inline]
fn stamp(batch: u64, pos: u32) -> u64 {
    ((batch + 1) << 32) | pos as u64
}

#[inline]
fn fresh_pos(mark: u64, batch: u64) -> Option<u32> {
    (mark >> 32 == batch + 1).then_some(mark as u32)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    /// The batch failed validation; the engine state is untouched.
    #[error("batch rejected: edge {0} appears more than once in the batch")]
    DuplicateInBatch(Edge),
    /// A rank lookup contradicted the engine's own bookkeeping. This is a
    /// defect report, not an input error; the engine should be discarded.
    #[error("batch aborted, engine state is inconsistent: {0}")]
    RankInconsistency(#[from] RankQueryError),
}

/// Maintains `r` independent estimators over a batched edge stream.
///
/// `ingest_batch` requires exclusive access for its whole duration;
/// between batches the engine can be read freely.
pub struct Engine {
    exec: Exec,
    decisions: DecisionSource,
    state: StreamState,
    // Estimator state, stored by column.
    f1: Vec<Slot>,
    f2: Vec<Slot>,
    f3: Vec<Slot>,
    chi: Vec<u64>,
    f1_mark: Vec<u64>,
    f2_mark: Vec<u64>,
}

impl Engine {
    pub fn new(estimators: usize, seed: u64, exec: Exec) -> Engine {
        assert!(estimators < u32::MAX as usize, "estimator count must fit in 32 bits");
        Engine {
            exec,
            decisions: DecisionSource::new(seed),
            state: StreamState::default(),
            f1: vec![EMPTY; estimators],
            f2: vec![EMPTY; estimators],
            f3: vec![EMPTY; estimators],
            chi: vec![0; estimators],
            f1_mark: vec![0; estimators],
            f2_mark: vec![0; estimators],
        }
    }

    pub fn estimator_count(&self) -> usize {
        self.f1.len()
    }

    pub fn state(&self) -> StreamState {
        self.state
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// Snapshot of one estimator. Batch-local positions are only alive
    /// during a batch update, so snapshots always read them as stale.
    pub fn estimator(&self, i: usize) -> Estimator {
        Estimator {
            f1: self.f1[i].get(),
            f2: self.f2[i].get(),
            f3: self.f3[i].get(),
            chi: self.chi[i],
            f1_batch_pos: fresh_pos(self.f1_mark[i], self.state.batches_seen),
            f2_batch_pos: fresh_pos(self.f2_mark[i], self.state.batches_seen),
        }
    }

    pub fn snapshot(&self) -> Vec<Estimator> {
        (0..self.estimator_count()).map(|i| self.estimator(i)).collect()
    }

    /// The coarse per-estimator estimates at the current stream position.
    pub fn coarse_estimates(&self) -> Vec<u128> {
        let m = self.state.m_seen as u128;
        tabulate(self.exec, self.f1.len(), |i| {
            if self.f3[i].is_empty() {
                0
            } else {
                self.chi[i] as u128 * m
            }
        })
    }

    /// Median-of-means aggregate over the coarse estimates.
    pub fn estimate(&self, groups: usize) -> Result<f64, aggregate::AggregateError> {
        aggregate::aggregate_coarse(self.exec, &self.coarse_estimates(), groups)
    }

    /// Folds one batch into every estimator. The batch must not repeat an
    /// edge; validation happens before any state changes. Self-loops are
    /// unrepresentable in [`Edge`].
    pub fn ingest_batch(&mut self, w: &[Edge]) -> Result<(), EngineError> {
        let batch_id = self.state.batches_seen;
        assert!(batch_id < u32::MAX as u64, "batch counter exhausted the stamp space");
        if w.is_empty() {
            self.state.batches_seen += 1;
            return Ok(());
        }
        assert!(w.len() < u32::MAX as usize, "batch too large for 32-bit positions");
        let sorted = prim::sort_by(self.exec, w, |a, b| a.cmp(b));
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(EngineError::DuplicateInBatch(pair[0]));
        }

        let ranked = rank::rank_all(self.exec, w);
        let closing = rank::build_closing_index(self.exec, w);
        let draws = self.decisions.for_batch(batch_id);

        self.step1_level1(w, batch_id, draws);
        self.step2_level2(batch_id, &ranked, draws)?;
        self.step3_closing(batch_id, &closing);

        self.state.m_seen += w.len() as u64;
        self.state.batches_seen += 1;
        Ok(())
    }

    /// Step 1: reservoir replacement of the level-1 edges. One fused
    /// data-parallel pass: index draw, gather from the batch, and the
    /// estimator update, touching only the replaced estimators' state.
    fn step1_level1(&mut self, w: &[Edge], batch_id: u64, draws: BatchDraws) {
        let exec = self.exec;
        let r = self.f1.len();
        let e_count = self.state.m_seen;
        let total = e_count + w.len() as u64;

        let f1 = prim::SharedSliceMut::new(&mut self.f1);
        let f2 = prim::SharedSliceMut::new(&mut self.f2);
        let f3 = prim::SharedSliceMut::new(&mut self.f3);
        let chi = prim::SharedSliceMut::new(&mut self.chi);
        let f1_mark = prim::SharedSliceMut::new(&mut self.f1_mark);
        for_each_index(exec, r, |i| {
            let d = draws.uniform(i as u64, DrawTag::Level1, total);
            if d >= e_count {
                let k = (d - e_count) as usize;
                // A replaced level-1 edge restarts the whole tuple: the
                // old neighborhood count and deeper levels refer to it.
                unsafe {
                    f1.write(i, Slot::of(w[k]));
                    f2.write(i, EMPTY);
                    f3.write(i, EMPTY);
                    chi.write(i, 0);
                    f1_mark.write(i, stamp(batch_id, k as u32 + 1));
                }
            }
        });
    }

    /// Step 2: level-2 edges and neighborhood counts through the rank index.
    fn step2_level2(
        &mut self,
        batch_id: u64,
        ranked: &rank::RankedArcs,
        draws: BatchDraws,
    ) -> Result<(), EngineError> {
        let exec = self.exec;
        let r = self.f1.len();

        // Both endpoint queries per estimator; level-1 edges from earlier
        // batches use the old-edge sentinel and resolve to batch degrees.
        let pos_query = |i: usize| match fresh_pos(self.f1_mark[i], batch_id) {
            Some(p) => PosQuery::At(p),
            None => PosQuery::Old,
        };
        let ld_q: Vec<(VertexId, PosQuery)> =
            tabulate(exec, r, |i| (self.f1[i].u, pos_query(i)));
        let ld = ranked.query_rank_outgoing(exec, &ld_q)?;
        let rd_q: Vec<(VertexId, PosQuery)> =
            tabulate(exec, r, |i| (self.f1[i].v, pos_query(i)));
        let rd = ranked.query_rank_outgoing(exec, &rd_q)?;

        // One draw decides keep-vs-replace and doubles as the substream
        // name: replacement happens iff the draw lands past chi_minus, and
        // the overshoot is the name phi. Estimators without a level-1 edge
        // (possible only before any edge arrived) have no group and fall
        // out with chi_plus = 0.
        let replacements: Vec<(u32, SubstreamQuery)> = {
            let compute = |i: usize| -> Option<(u32, SubstreamQuery)> {
                if self.f1[i].is_empty() {
                    return None;
                }
                let chi_minus = self.chi[i];
                let chi_plus = ld[i] + rd[i];
                if chi_plus == 0 {
                    return None;
                }
                let d = draws.uniform(i as u64, DrawTag::Level2, chi_minus + chi_plus);
                (d >= chi_minus).then(|| {
                    (
                        i as u32,
                        SubstreamQuery {
                            u: self.f1[i].u,
                            v: self.f1[i].v,
                            ld_u: ld[i],
                            phi: d - chi_minus,
                        },
                    )
                })
            };
            match exec {
                Exec::Sequential => (0..r).filter_map(compute).collect(),
                Exec::Parallel => {
                    use rayon::prelude::*;
                    (0..r).into_par_iter().filter_map(compute).collect()
                }
            }
        };
        let queries: Vec<SubstreamQuery> = prim::map(exec, &replacements, |p| p.1);
        let resolved = ranked.substream_edges(exec, &queries)?;

        // Apply: everyone's chi grows by chi_plus; replacers install the
        // fresh level-2 edge and drop any closing edge.
        crate::exec::for_each_index_mut(exec, &mut self.chi, |i, c| {
            *c += ld[i] + rd[i];
        });
        {
            let f2 = prim::SharedSliceMut::new(&mut self.f2);
            let f3 = prim::SharedSliceMut::new(&mut self.f3);
            let f2_mark = prim::SharedSliceMut::new(&mut self.f2_mark);
            for_each_index(exec, replacements.len(), |k| {
                let i = replacements[k].0 as usize;
                let (edge, pos) = resolved[k];
                unsafe {
                    f2.write(i, Slot::of(edge));
                    f2_mark.write(i, stamp(batch_id, pos));
                    f3.write(i, EMPTY);
                }
            });
        }
        Ok(())
    }

    /// Step 3: closing-edge detection for open wedges.
    fn step3_closing(&mut self, batch_id: u64, closing: &rank::ClosingIndex) {
        let exec = self.exec;
        let r = self.f1.len();

        let open: Vec<(u32, Edge, u32)> = {
            let compute = |i: usize| -> Option<(u32, Edge, u32)> {
                if !self.f3[i].is_empty() || self.f2[i].is_empty() {
                    return None;
                }
                let f1 = self.f1[i].get().expect("f2 set implies f1 set");
                let f2 = self.f2[i].get().expect("checked non-empty");
                let candidate = f1
                    .closing_candidate(f2)
                    .expect("level-2 edges are adjacent to level-1 edges");
                // The closing edge must arrive after the level-2 edge: any
                // batch position beats an older f2, only later positions
                // beat an f2 from this batch.
                let min_pos = fresh_pos(self.f2_mark[i], batch_id).unwrap_or(0);
                Some((i as u32, candidate, min_pos))
            };
            match exec {
                Exec::Sequential => (0..r).filter_map(compute).collect(),
                Exec::Parallel => {
                    use rayon::prelude::*;
                    (0..r).into_par_iter().filter_map(compute).collect()
                }
            }
        };
        let candidates: Vec<Edge> = prim::map(exec, &open, |c| c.1);
        let hits = closing.lookup(exec, &candidates);

        let f3 = prim::SharedSliceMut::new(&mut self.f3);
        for_each_index(exec, open.len(), |k| {
            let (i, candidate, min_pos) = open[k];
            if let Some(pos) = hits[k] {
                if pos > min_pos {
                    unsafe { f3.write(i as usize, Slot::of(candidate)) };
                }
            }
        });
    }
}
