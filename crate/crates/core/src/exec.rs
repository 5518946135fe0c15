//! Sequential or data-parallel evaluation of independent work items.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans out over
//! rayon's pool; without it every call runs sequentially. Results always come
//! back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maps and collects, returning the first error in input order.
    pub fn try_map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

/// Sizes the global pool. Must run before any parallel work; later calls
/// fail with a configuration error. A no-op without the `parallel` feature.
pub fn configure_threads(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(())
}
