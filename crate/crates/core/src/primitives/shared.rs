//! Raw shared-output helpers for parallel scatters.

use rayon::prelude::*;

use crate::exec::{Exec, PAR_CHUNK};

/// A mutable slice shareable across parallel subtasks for index-disjoint
/// writes. Every write target must be unique across all concurrent users;
/// callers uphold this by scattering through a permutation or through
/// precomputed disjoint offsets.
pub(crate) struct SharedSliceMut<'a, T> {
    ptr: *mut T,
    len: usize,
    _marker: std::marker::PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for SharedSliceMut<'_, T> {}
unsafe impl<T: Send> Sync for SharedSliceMut<'_, T> {}

impl<'a, T> SharedSliceMut<'a, T> {
    pub(crate) fn new(slice: &'a mut [T]) -> Self {
        SharedSliceMut { ptr: slice.as_mut_ptr(), len: slice.len(), _marker: std::marker::PhantomData }
    }

    /// # Safety
    /// `i < len` and no other task writes or reads index `i` concurrently.
    pub(crate) unsafe fn write(&self, i: usize, value: T) {
        debug_assert!(i < self.len);
        unsafe { self.ptr.add(i).write(value) };
    }
}

/// Fused resolve-and-scatter: computes `(index, value) = f(j)` for every
/// `j in 0..n` and writes `out[index] = value`. The produced indices must
/// be pairwise distinct and in range.
pub(crate) fn scatter_from<T: Copy + Send + Sync>(
    exec: Exec,
    out: &mut [T],
    n: usize,
    f: impl Fn(usize) -> (usize, T) + Sync + Send,
) {
    match exec {
        Exec::Sequential => {
            for j in 0..n {
                let (i, v) = f(j);
                out[i] = v;
            }
        }
        Exec::Parallel => {
            let slots = SharedSliceMut::new(out);
            (0..n).into_par_iter().with_min_len(1024).for_each(|j| {
                let (i, v) = f(j);
                assert!(i < slots.len);
                // Distinct indices make these writes disjoint.
                unsafe { slots.write(i, v) };
            });
        }
    }
}

/// `out[indices[j]] = values[j]` for all `j`; `indices` must be pairwise
/// distinct and in range.
pub(crate) fn scatter<T: Copy + Send + Sync>(
    exec: Exec,
    out: &mut [T],
    indices: &[usize],
    values: &[T],
) {
    debug_assert_eq!(indices.len(), values.len());
    match exec {
        Exec::Sequential => {
            for (&i, &v) in indices.iter().zip(values) {
                out[i] = v;
            }
        }
        Exec::Parallel => {
            let slots = SharedSliceMut::new(out);
            indices
                .par_chunks(PAR_CHUNK)
                .zip(values.par_chunks(PAR_CHUNK))
                .for_each(|(is, vs)| {
                    for (&i, &v) in is.iter().zip(vs) {
                        assert!(i < slots.len);
                        // Distinct indices make these writes disjoint.
                        unsafe { slots.write(i, v) };
                    }
                });
        }
    }
}
