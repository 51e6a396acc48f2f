//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans chunks
//! out over the rayon pool; without it every request runs sequentially.
//! Chunk boundaries never depend on the thread count and partial results are
//! folded in chunk order, so a reduction that is exact (integers, rationals,
//! fixed-point accumulators) gives identical results in both modes.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

fn chunk_ranges(len: usize, chunk: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    let chunk = chunk.max(1);
    (0..len.div_ceil(chunk)).map(move |i| i * chunk..((i + 1) * chunk).min(len))
}

/// Maps every chunk of `0..len` and folds the partial results in chunk order.
pub fn map_reduce<T, M, R>(exec: Execution, len: usize, chunk: usize, map: M, reduce: R) -> Option<T>
where
    T: Send,
    M: Fn(Range<usize>) -> T + Sync + Send,
    R: Fn(T, T) -> T,
{
    if len == 0 {
        return None;
    }
    if !exec.is_parallel() || len <= chunk {
        return chunk_ranges(len, chunk).map(&map).reduce(reduce);
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let parts: Vec<T> = chunk_ranges(len, chunk)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(&map)
            .collect();
        parts.into_iter().reduce(reduce)
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

/// Order-preserving map over `0..len`.
pub fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if !exec.is_parallel() {
        return (0..len).map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}
