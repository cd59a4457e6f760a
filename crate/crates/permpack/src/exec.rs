//! A rayon-backed [`Executor`].

use permpack_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PERMPACK_THREADS";

/// Runs jobs on a dedicated rayon pool; results come back in index order.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `None` lets rayon pick one worker per core.
    pub fn new(threads: Option<usize>) -> Result<Self, CliError> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(CliError::Usage(format!("{THREADS_ENV} must be at least 1")));
            }
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
        Ok(Parallel { pool })
    }

    /// Reads the worker cap from [`THREADS_ENV`].
    pub fn from_env() -> Result<Self, CliError> {
        Parallel::new(threads_from_env()?)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{THREADS_ENV}: {e}"))),
    }
}

impl Executor for Parallel {
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(&job).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use permpack_core::Sequential;

    #[test]
    fn results_stay_in_index_order() {
        let par = Parallel::new(Some(4)).unwrap();
        let seq: Vec<usize> = Sequential.map_indexed(1000, |i| i * i);
        assert_eq!(par.map_indexed(1000, |i| i * i), seq);
        assert_eq!(par.threads(), 4);
    }

    #[test]
    fn zero_threads_is_rejected() {
        assert!(Parallel::new(Some(0)).is_err());
    }
}
