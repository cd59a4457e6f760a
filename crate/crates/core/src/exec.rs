use alloc::vec::Vec;

/// Runs a batch of independent, index-addressed jobs.
///
/// Implementations may run jobs concurrently but must return the results in
/// index order, so every reduction performed on the output is independent of
/// completion order.
pub trait Executor {
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(job).collect()
    }
}
