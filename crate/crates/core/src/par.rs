//! Data-parallel mapping with a sequential fallback.
//!
//! The `parallel` feature (on by default) routes bulk per-item work —
//! instance sampling, prompt rendering, model querying — through rayon.
//! Building with `--no-default-features` swaps in plain iterators with
//! identical results: all parallel work in this crate is index-addressed and
//! order-preserving, so the feature only changes wall-clock time, never
//! bytes. The `*_seq` entry points stay sequential under either build so
//! benchmarks can compare the two modes directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order, failing fast on the first error.
/// Parallel under the `parallel` feature, sequential otherwise.
#[cfg(feature = "parallel")]
pub(crate) fn try_map<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Send + Sync,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Send + Sync,
{
    items.iter().map(f).collect()
}

/// Map `f` over `items` sequentially regardless of the feature set; the
/// baseline the benchmarks compare the parallel path against.
pub(crate) fn try_map_seq<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    F: Fn(&T) -> Result<U, E>,
{
    items.iter().map(f).collect()
}

/// Infallible order-preserving map; parallel under the `parallel` feature.
#[cfg(feature = "parallel")]
pub(crate) fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    items.iter().map(f).collect()
}
