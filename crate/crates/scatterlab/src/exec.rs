//! Thread-pool executor for the core's independent jobs.

use rayon::prelude::*;
use scatterlab_core::exec::Executor;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "SCATTERLAB_THREADS";

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// A pool with exactly `threads` workers (at least one).
    pub fn with_threads(threads: usize) -> Pool {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
        Pool { pool }
    }

    /// Reads `SCATTERLAB_THREADS`; unset or unparsable means one per core.
    pub fn from_env() -> Pool {
        let cap = std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok());
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        Pool::with_threads(cap.map_or(cores, |c| c.min(cores).max(1)))
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn run<R: Send, F: Fn(usize) -> R + Sync>(&self, n: usize, f: F) -> Vec<R> {
        // indexed collect keeps job order regardless of scheduling
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}
