//! Stable least-significant-digit radix sort on `u64` keys.
//!
//! Four 16-bit passes, each a histogram plus a stable scatter. Chunk
//! boundaries are fixed by input length, per-chunk digit offsets are
//! precomputed, and chunks write to disjoint positions, so the result is
//! identical for any worker count and equals a stable comparison sort on
//! the key.

use rayon::prelude::*;

use super::shared::SharedSliceMut;
use crate::exec::Exec;

const DIGIT_BITS: u32 = 16;
const BUCKETS: usize = 1 << DIGIT_BITS;
const CHUNK: usize = 1 << 16;
/// Below this size the comparison sort wins on constants.
const SMALL_INPUT: usize = 1 << 11;

pub(crate) fn radix_sort_by_key<T: Copy + Send + Sync>(
    exec: Exec,
    items: &[T],
    key: impl Fn(&T) -> u64 + Sync,
) -> Vec<T> {
    if items.len() <= SMALL_INPUT {
        return super::sort_by(exec, items, |x, y| key(x).cmp(&key(y)));
    }
    let n = items.len();
    let mut cur = items.to_vec();
    let mut tmp: Vec<T> = Vec::with_capacity(n);
    // Safety: every pass writes all n slots before the buffers swap.
    unsafe { tmp.set_len(n) };

    for pass in 0..4u32 {
        let shift = pass * DIGIT_BITS;
        let digit = |x: &T| ((key(x) >> shift) & (BUCKETS as u64 - 1)) as usize;

        // Per-chunk digit histograms.
        let chunk_count = n.div_ceil(CHUNK);
        let mut hist: Vec<Vec<u32>> = match exec {
            Exec::Sequential => cur
                .chunks(CHUNK)
                .map(|c| {
                    let mut h = vec![0u32; BUCKETS];
                    for x in c {
                        h[digit(x)] += 1;
                    }
                    h
                })
                .collect(),
            Exec::Parallel => cur
                .par_chunks(CHUNK)
                .map(|c| {
                    let mut h = vec![0u32; BUCKETS];
                    for x in c {
                        h[digit(x)] += 1;
                    }
                    h
                })
                .collect(),
        };
        debug_assert_eq!(hist.len(), chunk_count);

        // Global bucket totals; skip the pass if one bucket holds everything.
        let mut totals = vec![0usize; BUCKETS];
        for h in &hist {
            for (t, &c) in totals.iter_mut().zip(h.iter()) {
                *t += c as usize;
            }
        }
        if totals.iter().any(|&t| t == n) {
            continue;
        }

        // Turn histograms into per-chunk starting offsets, bucket-major.
        let mut base = 0usize;
        for d in 0..BUCKETS {
            for h in hist.iter_mut() {
                let c = h[d] as usize;
                h[d] = base as u32;
                base += c;
            }
        }
        debug_assert_eq!(base, n);

        // Stable scatter: chunks run in input order per bucket.
        {
            let out = SharedSliceMut::new(&mut tmp[..]);
            let body = |(c, (chunk, offsets)): (usize, (&[T], &mut Vec<u32>))| {
                let _ = c;
                for &x in chunk {
                    let d = digit(&x);
                    let dst = offsets[d] as usize;
                    offsets[d] += 1;
                    // Offsets partition 0..n disjointly across chunks.
                    unsafe { out.write(dst, x) };
                }
            };
            match exec {
                Exec::Sequential => {
                    cur.chunks(CHUNK).zip(hist.iter_mut()).enumerate().for_each(body)
                }
                Exec::Parallel => cur
                    .par_chunks(CHUNK)
                    .zip(hist.par_iter_mut())
                    .enumerate()
                    .for_each(body),
            }
        }
        std::mem::swap(&mut cur, &mut tmp);
    }
    cur
}
