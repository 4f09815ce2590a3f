//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel map in the crate goes through these functions so that the
//! `parallel` feature (rayon) can be switched off at compile time, and so that
//! callers can force sequential execution at run time for benchmarking.
//! Results are always returned in input order, which keeps every computation
//! deterministic regardless of worker scheduling.

use serde::{Deserialize, Serialize};

/// Run-time execution strategy.
///
/// `Parallel` silently degrades to sequential execution when the crate is
/// built without the `parallel` feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Order-preserving flat map over a slice.
pub fn flat_map<T, R, I, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: IntoIterator<Item = R>,
    F: Fn(&T) -> I + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items
            .par_iter()
            .map(|t| f(t).into_iter().collect::<Vec<R>>())
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
    }
    let _ = mode;
    items.iter().flat_map(f).collect()
}

/// Caps the global worker pool. Returns `false` if the pool was already
/// initialised (or the crate was built without `parallel`).
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// Reads `MPM_THREADS` and caps the worker pool accordingly.
pub fn configure_threads_from_env() -> Option<usize> {
    let threads = std::env::var("MPM_THREADS").ok()?.trim().parse::<usize>().ok()?;
    configure_threads(threads);
    Some(threads)
}
