//! Data-parallel helpers. With the `parallel` feature the loops run on the
//! current rayon pool; without it they run sequentially. Every helper writes
//! each output slot from exactly one index, so results do not depend on the
//! number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Builds `vec![f(0), f(1), .., f(n - 1)]`.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Fills `out` in chunks of `chunk` elements; `f` gets the chunk's starting
/// index and the mutable chunk.
pub fn fill_chunks<T, F>(out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    }
}

/// Number of workers the helpers will use.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Caps the process-wide pool at `workers` threads. Must run before any
/// parallel work; returns false if the pool was already started. 0 leaves
/// the default in place.
pub fn set_global_workers(workers: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        workers == 0
            || rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global()
                .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        true
    }
}

/// Runs `f` with the helpers capped at `workers` threads (0 means the default
/// pool).
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
