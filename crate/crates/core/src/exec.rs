//! Indexed map over replicates, run on a rayon pool when the `parallel`
//! feature is enabled and sequentially otherwise.
//!
//! Results are always returned in index order, and every replicate derives
//! its randomness from its index, so output does not depend on the worker
//! count.

use std::fmt;
#[cfg(feature = "parallel")]
use std::sync::Arc;

#[derive(Clone, Default)]
pub struct Exec {
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
    sequential: bool,
}

impl fmt::Debug for Exec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Exec")
            .field("sequential", &self.sequential)
            .field("threads", &self.threads())
            .finish()
    }
}

impl Exec {
    /// Run everything on the calling thread.
    pub fn sequential() -> Self {
        Self {
            sequential: true,
            ..Self::default()
        }
    }

    /// Use the global pool (default size = available parallelism).
    pub fn parallel() -> Self {
        Self::default()
    }

    /// Use a dedicated pool with `threads` workers. Without the `parallel`
    /// feature this is the same as [`Exec::sequential`].
    pub fn with_threads(threads: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .expect("failed to build worker pool");
            Self {
                pool: Some(Arc::new(pool)),
                sequential: false,
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Self::sequential()
        }
    }

    pub fn threads(&self) -> usize {
        if self.sequential {
            return 1;
        }
        #[cfg(feature = "parallel")]
        {
            match &self.pool {
                Some(p) => p.current_num_threads(),
                None => rayon::current_num_threads(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            1
        }
    }

    /// `(0..len).map(f).collect()`, possibly in parallel.
    pub fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.sequential {
            return (0..len).map(f).collect();
        }
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let run = || (0..len).into_par_iter().map(&f).collect();
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..len).map(f).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for exec in [Exec::sequential(), Exec::parallel(), Exec::with_threads(3)] {
            let v = exec.map(1000, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        }
    }

    #[test]
    fn nested_maps() {
        let exec = Exec::with_threads(4);
        let v = exec.map(8, |i| exec.map(8, |j| i * j).into_iter().sum::<usize>());
        assert_eq!(v, (0..8).map(|i| i * 28).collect::<Vec<_>>());
    }
}
