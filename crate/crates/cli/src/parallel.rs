use std::time::Instant;

use dihs_core::exec::{Clock, Executor};

/// Spreads worker jobs over up to `threads` scoped OS threads. Results are
/// returned in job order whatever the thread count.
#[derive(Debug, Clone, Copy)]
pub struct ThreadPool {
    threads: usize,
}

impl ThreadPool {
    pub fn new(threads: usize) -> Self {
        Self {
            threads: threads.max(1),
        }
    }

    /// One thread per available core.
    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn threads(&self) -> usize {
        self.threads
    }
}

impl Executor for ThreadPool {
    fn run_indexed<R, F>(&self, count: usize, job: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        let threads = self.threads.min(count);
        if threads <= 1 {
            return (0..count).map(job).collect();
        }
        let job = &job;
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    scope.spawn(move || {
                        (t..count)
                            .step_by(threads)
                            .map(|i| (i, job(i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            let mut slots: Vec<Option<R>> = (0..count).map(|_| None).collect();
            for handle in handles {
                for (i, r) in handle.join().expect("worker thread panicked") {
                    slots[i] = Some(r);
                }
            }
            slots.into_iter().map(|r| r.expect("every job ran")).collect()
        })
    }
}

/// Seconds since construction, from [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Clock for MonotonicClock {
    fn now_seconds(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}
