//! Data-parallel map helpers. With the `parallel` feature (default) the work
//! is distributed via rayon; without it the same entry points run
//! sequentially. Results are always in input order, so output is identical
//! either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;

/// Map over a slice, in parallel when the `parallel` feature is enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Sequential map with the same signature as [`map`], for baseline
/// comparisons and strictly single-threaded callers.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Fallible map; the reported error is the first by input order regardless
/// of execution order.
pub fn try_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map(items, f).into_iter().collect()
}
