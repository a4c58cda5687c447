//! Data-parallel sequence primitives.
//!
//! The building blocks for every batch-processing step in this crate:
//! `sort`, `merge`, `concat`, `map`, `scan`, `extract`, `combine`, a
//! prefix count with resets, and the two multisearch variants (exact and
//! predecessor-or-equal lookup of many keys against a key-value sequence).
//!
//! All operations are pure: inputs are borrowed immutably and outputs are
//! freshly allocated. Each takes an [`Exec`] selecting between a sequential
//! reference path and a fork/join path; the two paths produce bit-identical
//! results for any input that satisfies the documented preconditions, and
//! parallel results never depend on the worker count.
//!
//! Sorting is stable, so sequences with duplicate keys still have one
//! canonical output order across modes and machines.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::exec::{tabulate, Exec, PAR_CHUNK};

mod radix;
mod shared;

pub(crate) use shared::{scatter_from, SharedSliceMut};

/// Errors produced by primitives with nontrivial preconditions.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrimitiveError {
    /// `combine` was given sequences of different lengths.
    #[error("combine requires equal-length inputs, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    /// `extract` was given an index outside the source sequence.
    #[error("extract index {index} at position {position} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize, position: usize },
}

/// Applies `f` to every element: `out[i] = f(&a[i])`.
pub fn map<T: Sync, U: Send>(exec: Exec, a: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    tabulate(exec, a.len(), |i| f(&a[i]))
}

/// Elementwise combination of two equal-length sequences:
/// `out[i] = f(&a[i], &b[i])`.
pub fn combine<T: Sync, U: Sync, V: Send>(
    exec: Exec,
    a: &[T],
    b: &[U],
    f: impl Fn(&T, &U) -> V + Sync + Send,
) -> Result<Vec<V>, PrimitiveError> {
    if a.len() != b.len() {
        return Err(PrimitiveError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(tabulate(exec, a.len(), |i| f(&a[i], &b[i])))
}

/// Concatenates two sequences.
pub fn concat<T: Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

/// Stable sort under `cmp`. The output is the unique stable permutation of
/// `a` ordered by `cmp`, identical in both execution modes.
pub fn sort_by<T: Clone + Send>(
    exec: Exec,
    a: &[T],
    cmp: impl Fn(&T, &T) -> Ordering + Sync,
) -> Vec<T> {
    let mut v = a.to_vec();
    match exec {
        Exec::Sequential => v.sort_by(|x, y| cmp(x, y)),
        Exec::Parallel => v.par_sort_by(|x, y| cmp(x, y)),
    }
    v
}

/// Stable sort by a `u64` key, using a least-significant-digit radix sort.
///
/// Produces exactly the same sequence as [`sort_by`] comparing `key(x)`,
/// but runs in a constant number of linear passes; this is the fast path
/// for the per-batch query sorts, where keys are vertex identifiers.
pub fn sort_by_u64_key<T: Copy + Send + Sync>(
    exec: Exec,
    a: &[T],
    key: impl Fn(&T) -> u64 + Sync,
) -> Vec<T> {
    radix::radix_sort_by_key(exec, a, key)
}

/// Merges two sequences sorted under `cmp` into one sorted sequence.
/// Stable: on ties, elements of `a` precede elements of `b`.
pub fn merge_by<T: Copy + Send + Sync>(
    exec: Exec,
    a: &[T],
    b: &[T],
    cmp: impl Fn(&T, &T) -> Ordering + Sync,
) -> Vec<T> {
    let n = a.len() + b.len();
    let mut out: Vec<T> = Vec::with_capacity(n);
    {
        let spare = out.spare_capacity_mut();
        match exec {
            Exec::Sequential => seq_merge_into(a, b, spare, &cmp),
            Exec::Parallel => par_merge_into(a, b, spare, &cmp),
        }
    }
    // All n slots are initialized by the merge above.
    unsafe { out.set_len(n) };
    out
}

const MERGE_SEQ_THRESHOLD: usize = 1 << 13;

fn seq_merge_into<T: Copy>(
    a: &[T],
    b: &[T],
    out: &mut [std::mem::MaybeUninit<T>],
    cmp: &(impl Fn(&T, &T) -> Ordering + Sync),
) {
    debug_assert_eq!(out.len(), a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    for slot in out.iter_mut() {
        let take_a = if i == a.len() {
            false
        } else if j == b.len() {
            true
        } else {
            cmp(&a[i], &b[j]) != Ordering::Greater
        };
        if take_a {
            slot.write(a[i]);
            i += 1;
        } else {
            slot.write(b[j]);
            j += 1;
        }
    }
}

fn par_merge_into<T: Copy + Send + Sync>(
    a: &[T],
    b: &[T],
    out: &mut [std::mem::MaybeUninit<T>],
    cmp: &(impl Fn(&T, &T) -> Ordering + Sync),
) {
    if a.len() + b.len() <= MERGE_SEQ_THRESHOLD {
        return seq_merge_into(a, b, out, cmp);
    }
    // Split on the midpoint of the longer input; the cut points are a
    // function of the data alone, and tie direction keeps stability.
    let (a_mid, b_mid) = if a.len() >= b.len() {
        let ha = a.len() / 2;
        // b-elements strictly less than a[ha] go left; ties stay right,
        // after a[ha].
        let hb = b.partition_point(|x| cmp(x, &a[ha]) == Ordering::Less);
        (ha, hb)
    } else {
        let hb = b.len() / 2;
        // a-elements less than or equal to b[hb] go left, ahead of b[hb].
        let ha = a.partition_point(|x| cmp(x, &b[hb]) != Ordering::Greater);
        (ha, hb)
    };
    let (a_lo, a_hi) = a.split_at(a_mid);
    let (b_lo, b_hi) = b.split_at(b_mid);
    let (out_lo, out_hi) = out.split_at_mut(a_mid + b_mid);
    rayon::join(
        || par_merge_into(a_lo, b_lo, out_lo, cmp),
        || par_merge_into(a_hi, b_hi, out_hi, cmp),
    );
}

/// Exclusive prefix combination: `out[0] = id` and
/// `out[i] = id ⊕ a[0] ⊕ … ⊕ a[i-1]`.
///
/// `op` must be associative and `id` a left identity of `op`; under that
/// precondition the chunked parallel path reproduces the sequential
/// recurrence exactly.
pub fn scan<T: Copy + Send + Sync>(
    exec: Exec,
    a: &[T],
    op: impl Fn(T, T) -> T + Sync,
    id: T,
) -> Vec<T> {
    scan_with_total(exec, a, &op, id).0
}

/// As [`scan`], additionally returning the combination of the whole input.
pub fn scan_with_total<T: Copy + Send + Sync>(
    exec: Exec,
    a: &[T],
    op: &(impl Fn(T, T) -> T + Sync),
    id: T,
) -> (Vec<T>, T) {
    match exec {
        Exec::Sequential => {
            let mut out = Vec::with_capacity(a.len());
            let mut acc = id;
            for &x in a {
                out.push(acc);
                acc = op(acc, x);
            }
            (out, acc)
        }
        Exec::Parallel => {
            if a.is_empty() {
                return (Vec::new(), id);
            }
            // Upsweep: reduce each fixed-size chunk.
            let chunk_totals: Vec<T> = a
                .par_chunks(PAR_CHUNK)
                .map(|c| {
                    let mut acc = c[0];
                    for &x in &c[1..] {
                        acc = op(acc, x);
                    }
                    acc
                })
                .collect();
            // Carries across chunks, left to right.
            let mut carries = Vec::with_capacity(chunk_totals.len());
            let mut acc = id;
            for &t in &chunk_totals {
                carries.push(acc);
                acc = op(acc, t);
            }
            let total = acc;
            // Downsweep: local exclusive scan seeded with the carry.
            let mut out: Vec<T> = Vec::with_capacity(a.len());
            {
                let spare = out.spare_capacity_mut();
                spare
                    .par_chunks_mut(PAR_CHUNK)
                    .zip(a.par_chunks(PAR_CHUNK))
                    .zip(carries.par_iter())
                    .for_each(|((slots, src), &carry)| {
                        let mut acc = carry;
                        for (slot, &x) in slots.iter_mut().zip(src) {
                            slot.write(acc);
                            acc = op(acc, x);
                        }
                    });
            }
            unsafe { out.set_len(a.len()) };
            (out, total)
        }
    }
}

/// One element of a resettable count sequence: a unit contribution or a
/// reset of the running counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    One,
    Reset,
}

/// Prefix count with resets: `out[i]` is the value of an accumulator just
/// before position `i`, where the accumulator gains one per [`Mark::One`]
/// and returns to zero at each [`Mark::Reset`].
///
/// Realized as [`scan`] over (reset-seen, count) pairs, whose combination
/// is associative, so the parallel path matches the sequential loop.
pub fn scan_with_resets(exec: Exec, a: &[Mark]) -> Vec<u64> {
    let items: Vec<(bool, u64)> = map(exec, a, |m| match m {
        Mark::One => (false, 1u64),
        Mark::Reset => (true, 0u64),
    });
    let combined = scan(
        exec,
        &items,
        |x: (bool, u64), y: (bool, u64)| if y.0 { y } else { (x.0, x.1 + y.1) },
        (false, 0),
    );
    map(exec, &combined, |p| p.1)
}

/// Gathers `a[b[i]]` for every non-null index, null otherwise.
/// Indices are zero-based.
pub fn extract<T: Copy + Send + Sync>(
    exec: Exec,
    a: &[T],
    b: &[Option<usize>],
) -> Result<Vec<Option<T>>, PrimitiveError> {
    for (position, idx) in b.iter().enumerate() {
        if let Some(i) = idx {
            if *i >= a.len() {
                return Err(PrimitiveError::IndexOutOfRange {
                    index: *i,
                    len: a.len(),
                    position,
                });
            }
        }
    }
    Ok(tabulate(exec, b.len(), |j| b[j].map(|i| a[i])))
}

/// A sequence of key-value pairs with a flag recording whether it is
/// already sorted by key. Multisearch sorts an unsorted sequence on each
/// call, so callers on hot paths should construct these presorted.
#[derive(Debug, Clone)]
pub struct KeyValueSeq<K, V> {
    pairs: Vec<(K, V)>,
    sorted: bool,
}

impl<K: Ord + Copy, V: Copy> KeyValueSeq<K, V> {
    /// Wraps a pair sequence, detecting sortedness with one linear pass.
    pub fn from_pairs(pairs: Vec<(K, V)>) -> Self {
        let sorted = pairs.windows(2).all(|w| w[0].0 <= w[1].0);
        KeyValueSeq { pairs, sorted }
    }

    /// Wraps a sequence the caller guarantees is sorted by key.
    pub fn from_sorted(pairs: Vec<(K, V)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 <= w[1].0));
        KeyValueSeq { pairs, sorted: true }
    }

    pub fn pairs(&self) -> &[(K, V)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sorted_flag(&self) -> bool {
        self.sorted
    }

    fn sorted_pairs(&self, exec: Exec) -> std::borrow::Cow<'_, [(K, V)]>
    where
        K: Send + Sync,
        V: Send + Sync,
    {
        if self.sorted {
            std::borrow::Cow::Borrowed(&self.pairs)
        } else {
            std::borrow::Cow::Owned(sort_by(exec, &self.pairs, |x, y| x.0.cmp(&y.0)))
        }
    }
}

/// For each query key, the pair in `s` with exactly that key, if any.
/// Keys of `s` must be distinct. Output order follows `t`.
pub fn exact_multisearch<K, V>(
    exec: Exec,
    s: &KeyValueSeq<K, V>,
    t: &[K],
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    multisearch_unsorted(exec, s, t, ResolveKind::Exact)
}

/// For each query key, the pair in `s` with the largest key no larger than
/// the query, if any. Keys of `s` must be distinct. Output order follows `t`.
pub fn pred_eq_multisearch<K, V>(
    exec: Exec,
    s: &KeyValueSeq<K, V>,
    t: &[K],
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    multisearch_unsorted(exec, s, t, ResolveKind::PredEq)
}

/// [`exact_multisearch`] for queries already sorted ascending; skips the
/// query sort and answers in the given order.
pub fn exact_multisearch_presorted<K, V>(
    exec: Exec,
    s: &KeyValueSeq<K, V>,
    t: &[K],
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    debug_assert!(t.windows(2).all(|w| w[0] <= w[1]));
    let s_sorted = s.sorted_pairs(exec);
    resolve_sorted(exec, &s_sorted, t, ResolveKind::Exact)
}

/// [`pred_eq_multisearch`] for queries already sorted ascending.
pub fn pred_eq_multisearch_presorted<K, V>(
    exec: Exec,
    s: &KeyValueSeq<K, V>,
    t: &[K],
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    debug_assert!(t.windows(2).all(|w| w[0] <= w[1]));
    let s_sorted = s.sorted_pairs(exec);
    resolve_sorted(exec, &s_sorted, t, ResolveKind::PredEq)
}

#[derive(Clone, Copy)]
enum ResolveKind {
    Exact,
    PredEq,
}

fn multisearch_unsorted<K, V>(
    exec: Exec,
    s: &KeyValueSeq<K, V>,
    t: &[K],
    kind: ResolveKind,
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    let s_sorted = s.sorted_pairs(exec);
    // Sort queries tagged with their original positions, resolve by a
    // single co-traversal, then scatter answers back.
    let tagged: Vec<(K, usize)> = tabulate(exec, t.len(), |j| (t[j], j));
    let tagged = sort_by(exec, &tagged, |x, y| x.0.cmp(&y.0));
    let keys: Vec<K> = map(exec, &tagged, |p| p.0);
    let answers = resolve_sorted(exec, &s_sorted, &keys, kind);
    let mut out: Vec<Option<(K, V)>> = vec![None; t.len()];
    let positions: Vec<usize> = map(exec, &tagged, |p| p.1);
    shared::scatter(exec, &mut out, &positions, &answers);
    out
}

/// Answers sorted queries against sorted pairs by one forward co-traversal,
/// chunked for parallelism at fixed boundaries.
fn resolve_sorted<K, V>(
    exec: Exec,
    s: &[(K, V)],
    queries: &[K],
    kind: ResolveKind,
) -> Vec<Option<(K, V)>>
where
    K: Ord + Copy + Send + Sync,
    V: Copy + Send + Sync,
{
    let run = |qs: &[K], out: &mut [Option<(K, V)>]| {
        if qs.is_empty() {
            return;
        }
        let mut ptr = match kind {
            ResolveKind::Exact => s.partition_point(|p| p.0 < qs[0]),
            ResolveKind::PredEq => s.partition_point(|p| p.0 <= qs[0]),
        };
        for (q, slot) in qs.iter().zip(out.iter_mut()) {
            match kind {
                ResolveKind::Exact => {
                    while ptr < s.len() && s[ptr].0 < *q {
                        ptr += 1;
                    }
                    *slot = (ptr < s.len() && s[ptr].0 == *q).then(|| s[ptr]);
                }
                ResolveKind::PredEq => {
                    while ptr < s.len() && s[ptr].0 <= *q {
                        ptr += 1;
                    }
                    *slot = (ptr > 0).then(|| s[ptr - 1]);
                }
            }
        }
    };
    match exec {
        Exec::Sequential => {
            let mut out = vec![None; queries.len()];
            run(queries, &mut out);
            out
        }
        Exec::Parallel => {
            let mut out = vec![None; queries.len()];
            out.par_chunks_mut(PAR_CHUNK)
                .zip(queries.par_chunks(PAR_CHUNK))
                .for_each(|(slots, qs)| run(qs, slots));
            out
        }
    }
}
