//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch through rayon; without
//! it, or while [`force_sequential`] is set, they run on the calling thread.
//! Every helper assigns each output element to exactly one closure call, so
//! results are identical in both modes and for any worker count.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces the sequential path even when the `parallel` feature is enabled.
pub fn force_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::Relaxed)
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Calls `f(row, chunk)` for every `width`-sized row of `data`.
pub fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if is_parallel() {
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(row, chunk)| f(row, chunk));
        return;
    }
    data.chunks_mut(width)
        .enumerate()
        .for_each(|(row, chunk)| f(row, chunk));
}
