//! Work scheduling abstraction for the estimator sample loops.
//!
//! Samples are partitioned into fixed-size chunks; each chunk is reduced
//! sequentially in sample order and chunk results are merged in chunk order.
//! The chunk layout is independent of the executor, so any scheduler
//! (including a multithreaded one) produces bit-identical reductions.

use alloc::vec::Vec;

/// Number of samples per reduction chunk. Fixed so that results do not
/// depend on the executor or thread count.
pub const CHUNK: usize = 32;

/// Maps chunk indices `0..n_chunks` to values. Implementations may evaluate
/// chunks in any order or concurrently; the returned vector is ordered by
/// chunk index.
pub trait Executor {
    fn map_chunks<T: Send>(&self, n_chunks: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs every chunk on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_chunks<T: Send>(&self, n_chunks: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n_chunks).map(f).collect()
    }
}

/// Splits `n_items` into `CHUNK`-sized ranges; the last may be shorter.
pub fn chunk_ranges(n_items: usize) -> impl Iterator<Item = core::ops::Range<usize>> {
    let n_chunks = n_items.div_ceil(CHUNK);
    (0..n_chunks).map(move |c| {
        let start = c * CHUNK;
        start..(start + CHUNK).min(n_items)
    })
}

/// Range of items covered by one chunk.
pub fn chunk_range(chunk: usize, n_items: usize) -> core::ops::Range<usize> {
    let start = chunk * CHUNK;
    start..(start + CHUNK).min(n_items)
}

/// Number of chunks covering `n_items`.
pub fn chunk_count(n_items: usize) -> usize {
    n_items.div_ceil(CHUNK)
}
