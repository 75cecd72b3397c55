//! Thin data-parallel layer. With the `parallel` feature the helpers run on
//! the rayon global pool; without it they degrade to ordinary iterators.
//! Results always come back in index order so reductions stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len`, collecting results in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps `f` over a slice, collecting results in slice order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Splits `total` work items into fixed-size chunks and maps each chunk.
/// The chunking does not depend on the thread count.
pub fn map_chunks<T, F>(total: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    map_range(n_chunks, |c| {
        let start = c * chunk;
        f(c, start..(start + chunk).min(total))
    })
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
