//! Thin switch between rayon and serial execution.
//!
//! Results are produced in index order regardless of scheduling, so output
//! bytes do not depend on thread count.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

/// Apply `f` to disjoint row chunks of `data`, `chunk` rows of width `width`
/// at a time. `f` receives the index of the first row in the chunk.
#[cfg(feature = "parallel")]
pub fn chunks_mut<T, F>(data: &mut [T], width: usize, chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    use rayon::prelude::*;
    data.par_chunks_mut(width * chunk)
        .enumerate()
        .for_each(|(ci, rows)| f(ci * chunk, rows));
}

#[cfg(not(feature = "parallel"))]
pub fn chunks_mut<T, F>(data: &mut [T], width: usize, chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    for (ci, rows) in data.chunks_mut(width * chunk).enumerate() {
        f(ci * chunk, rows);
    }
}
