//! Block-parallel execution over integer ranges.
//!
//! With the `parallel` feature, an [`Executor`] with more than one worker owns
//! a dedicated rayon pool. Without it, or with one worker, blocks run in order
//! on the calling thread. Either way [`Executor::map`] returns results in input
//! order, so callers that merge ascending get identical output for every
//! worker count.

#[cfg(feature = "parallel")]
use std::sync::Arc;

use crate::error::{Error, Result};

/// Inclusive block `[lo, hi]`.
pub type Block = (u64, u64);

#[derive(Clone)]
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("workers", &self.workers)
            .field("parallel", &self.is_parallel())
            .finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Executor::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// An executor with `workers` threads. Falls back to sequential execution
    /// when the crate is built without the `parallel` feature.
    pub fn with_workers(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::NoWorkers);
        }
        if workers == 1 {
            return Ok(Executor::sequential());
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("collatz-worker-{i}"))
                .build()
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            Ok(Executor {
                workers,
                pool: Some(Arc::new(pool)),
            })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Executor { workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Applies `f` to every item; the output is in input order.
    pub fn map<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

/// Splits `[lo, hi]` into consecutive blocks of at most `size` integers.
pub fn blocks(lo: u64, hi: u64, size: u64) -> Vec<Block> {
    assert!(size > 0, "block size must be positive");
    if lo > hi {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = lo;
    loop {
        let end = start.saturating_add(size - 1).min(hi);
        out.push((start, end));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range_exactly() {
        assert_eq!(blocks(1, 10, 4), vec![(1, 4), (5, 8), (9, 10)]);
        assert_eq!(blocks(5, 5, 100), vec![(5, 5)]);
        assert!(blocks(6, 5, 1).is_empty());
        let top = blocks(u64::MAX - 2, u64::MAX, 2);
        assert_eq!(top, vec![(u64::MAX - 2, u64::MAX - 1), (u64::MAX, u64::MAX)]);
    }

    #[test]
    fn map_preserves_order_for_any_worker_count() {
        let items: Vec<u64> = (0..1000).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x).collect();
        for w in [1, 2, 4, 7] {
            let exec = Executor::with_workers(w).unwrap();
            assert_eq!(exec.map(&items, |x| x * x), expected);
        }
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(matches!(Executor::with_workers(0), Err(Error::NoWorkers)));
    }
}
