//! Worker pool and data-parallel helpers.
//!
//! With the `parallel` feature (default) work is dispatched through rayon;
//! without it every helper degrades to an in-order sequential loop. Results
//! are always returned in input order, so outputs never depend on which
//! worker finished first.

use crate::error::{Error, Result};

/// A fixed-size pool of sub-solve workers owned by one orchestrator.
pub struct WorkerPool {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool")
            .field("workers", &self.workers)
            .finish()
    }
}

impl WorkerPool {
    /// A pool with `workers` threads. `workers == 1` is sequential.
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::arg("worker count must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .thread_name(|i| format!("dqopt-worker-{i}"))
                        .build()
                        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?,
                )
            } else {
                None
            };
            Ok(Self { workers, pool })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Self { workers })
    }

    pub fn sequential() -> Self {
        Self {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// One worker per logical CPU, capped at `cap`.
    pub fn with_available(cap: usize) -> Result<Self> {
        Self::new(available_cpus().min(cap.max(1)))
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

    /// Apply `f` to every item; output order matches input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| {
                items
                    .par_iter()
                    .enumerate()
                    .map(|(i, t)| f(i, t))
                    .collect()
            });
        }
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

pub fn available_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Data-parallel `(0..len).map(f).collect()` on the ambient rayon pool.
pub fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}
