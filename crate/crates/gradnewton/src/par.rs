//! Order-preserving map helpers used by the data-parallel inner loops.
//!
//! With the `parallel` feature the maps run on the rayon pool; without it
//! they fall back to plain iterators. Results are collected in input order
//! and all reductions happen sequentially afterwards, so numeric output is
//! bit-identical across thread counts and both build modes.
//!
//! `min_len` bounds how finely rayon may split the input: per-face trig work
//! is so cheap that unbounded splitting costs more than it buys, while heavy
//! items (a Hessian eigensolve, a finite-difference column) want splitting
//! all the way down to 1.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_slice<T, U, F>(items: &[T], min_len: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .with_min_len(min_len.max(1))
            .map(f)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = min_len;
        items.iter().map(f).collect()
    }
}

pub(crate) fn map_slice_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

pub(crate) fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Split floor for per-face work; far below this the split overhead exceeds
/// the work itself.
pub(crate) const FACE_CHUNK: usize = 256;
