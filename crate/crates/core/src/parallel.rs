//! Thin shim over rayon so the data-parallel inner loops (brute-force vertex
//! enumeration, Monte Carlo theorem trials, batch solves) fall back to plain
//! sequential iteration when the `parallel` feature is disabled.

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential reference path, always available so benchmarks can compare.
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
