//! Hooks for parallel execution and timing.
//!
//! The solver describes one iteration as `r` independent worker jobs; an
//! [`Executor`] decides how they run. Results always come back indexed by
//! worker id so reductions are schedule independent.

use alloc::vec::Vec;

pub trait Executor {
    /// Evaluates `job(0..count)` and returns the results in index order.
    fn run_indexed<R, F>(&self, count: usize, job: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run_indexed<R, F>(&self, count: usize, job: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        (0..count).map(job).collect()
    }
}

/// Monotonic seconds since some fixed origin.
pub trait Clock {
    fn now_seconds(&self) -> f64;
}

/// Always reports zero; traces then carry `wall_seconds = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}
