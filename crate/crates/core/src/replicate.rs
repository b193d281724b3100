//! Seeded replica execution, parallel or sequential with identical results.

use crate::mix::derive_seed;

/// Run `f(index, seed)` for `index` in `0..reps` and return results in index order.
///
/// Seeds come from [`derive_seed`], so the output never depends on `threads`.
pub fn run_replicas<T, F>(master: u64, reps: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if threads > 1 {
        return parallel(master, reps, threads, f);
    }
    let _ = threads;
    sequential(master, reps, f)
}

pub fn sequential<T, F>(master: u64, reps: u64, f: F) -> Vec<T>
where
    F: Fn(u64, u64) -> T,
{
    (0..reps).map(|i| f(i, derive_seed(master, i))).collect()
}

#[cfg(feature = "parallel")]
pub fn parallel<T, F>(master: u64, reps: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| (0..reps).into_par_iter().map(|i| f(i, derive_seed(master, i))).collect())
}

/// Worker count from the environment override, else the machine's parallelism.
pub fn default_threads() -> usize {
    std::env::var("CRITFPP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t: &usize| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
