//! Execution-mode selection for the data-parallel primitives.
//!
//! Every primitive has two paths: a plain sequential reference path and a
//! fork/join path scheduled on the ambient rayon pool. Both paths produce
//! bit-identical output for the same input, so `Exec` only selects *how*
//! work is scheduled, never *what* is computed. Parallel paths split work
//! at positions derived from input length alone, which keeps results
//! independent of the number of worker threads.

use rayon::prelude::*;

/// How a primitive schedules its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    /// Plain single-threaded loops; the reference semantics.
    Sequential,
    /// Fork/join over the current rayon thread pool.
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        matches!(self, Exec::Parallel)
    }
}

impl Default for Exec {
    fn default() -> Self {
        Exec::Parallel
    }
}

/// Runs `f` inside a dedicated rayon pool with `workers` threads
/// (`workers = 0` uses one thread per logical CPU).
///
/// Engine runs and benchmarks use this to pin the worker count; results do
/// not depend on it, only timings do.
pub fn with_worker_count<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

/// Chunk length used by chunked parallel loops. Fixed so that the chunk
/// decomposition (and therefore any chunk-wise reduction order) depends only
/// on the input length, never on the worker count.
pub(crate) const PAR_CHUNK: usize = 1 << 14;

/// Elementwise tabulation: `out[i] = f(i)` for `i in 0..n`.
pub(crate) fn tabulate<U: Send>(exec: Exec, n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Runs `f(i)` for every `i in 0..n`, in parallel when requested. `f` must
/// be safe to call concurrently for distinct indices.
pub(crate) fn for_each_index(exec: Exec, n: usize, f: impl Fn(usize) + Sync + Send) {
    match exec {
        Exec::Sequential => (0..n).for_each(f),
        Exec::Parallel => (0..n).into_par_iter().with_min_len(1024).for_each(f),
    }
}

/// Applies `f` to every index of a mutable slice. Disjoint chunks are handed
/// to separate subtasks; `f` must only touch its own element.
pub(crate) fn for_each_index_mut<T: Send>(
    exec: Exec,
    out: &mut [T],
    f: impl Fn(usize, &mut T) + Sync + Send,
) {
    match exec {
        Exec::Sequential => {
            for (i, slot) in out.iter_mut().enumerate() {
                f(i, slot);
            }
        }
        Exec::Parallel => {
            out.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * PAR_CHUNK;
                for (j, slot) in chunk.iter_mut().enumerate() {
                    f(base + j, slot);
                }
            });
        }
    }
}
