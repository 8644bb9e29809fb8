//! Minimal deterministic job runner.
//!
//! Experiments decompose into independent jobs (one per diffusivity,
//! seed, or initial separation). Jobs run on a small thread pool sized
//! by the available parallelism and the results are merged back in job
//! order, so the output is identical to a sequential run.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Runs `worker(0..count)` and returns the results in index order.
pub fn run_indexed<T, F>(count: usize, worker: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(count)
        .max(1);
    if threads == 1 {
        return (0..count).map(worker).collect();
    }
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, T)>> = Mutex::new(Vec::with_capacity(count));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let result = worker(i);
                done.lock().expect("job results lock").push((i, result));
            });
        }
    });
    let mut results = done.into_inner().expect("job results lock");
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}
