//! Data-parallel map helpers: rayon when the `parallel` feature is enabled,
//! plain iteration otherwise.
//!
//! Results are collected in input order on both paths, and callers reduce the
//! collected vector sequentially, so every number the crate produces is
//! bitwise identical with and without the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn try_map<T: Sync, R: Send, E: Send, F: Fn(&T) -> Result<R, E> + Sync + Send>(
    items: &[T],
    f: F,
) -> Result<Vec<R>, E> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map<T, R, E, F: Fn(&T) -> Result<R, E>>(items: &[T], f: F) -> Result<Vec<R>, E> {
    items.iter().map(f).collect()
}

/// Sequential map regardless of features; the comparison baseline for the
/// bench suite.
pub fn map_seq<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}
