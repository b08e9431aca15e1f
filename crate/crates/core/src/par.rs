//! Data-parallel dispatch with a sequential fallback.
//!
//! With the `parallel` feature the helpers below fan work out over rayon;
//! without it (or inside [`sequential`]) they run on the calling thread.
//! Every helper writes each output slot from exactly one closure call, so
//! results are bit-identical between the two modes.

use std::cell::Cell;

/// Below this many output elements a sweep is not worth splitting.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 4096;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with parallel dispatch disabled on the current thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

/// Whether helpers called from this thread will use the thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Calls `f(index, chunk)` for every `chunk_len`-sized chunk of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(chunk_len > 0, "chunk length must be positive");
    #[cfg(feature = "parallel")]
    if is_parallel() && data.len() >= MIN_PARALLEL_LEN {
        use rayon::prelude::*;
        let min_chunks = (MIN_PARALLEL_LEN / chunk_len).max(1);
        data.par_chunks_mut(chunk_len)
            .with_min_len(min_chunks)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Evaluates `f(i)` for `i in 0..n`, returning results in index order.
///
/// `coarse` marks each call as expensive (a whole run, say), which disables
/// the small-workload cutoff.
pub fn map_range<T, F>(n: usize, coarse: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && (coarse || n >= MIN_PARALLEL_LEN) {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = coarse;
    (0..n).map(f).collect()
}

/// Runs `f` on a pool of `jobs` worker threads (0 keeps the global pool).
pub fn with_jobs<R, F>(jobs: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if jobs > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}
