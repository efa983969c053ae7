//! Replication ensembles that are invariant to the worker count.

use rayon::prelude::*;

/// Evaluate `f(0..reps)` and return the results in replication order.
///
/// With `workers <= 1` the loop runs on the calling thread; otherwise on a
/// dedicated pool of `workers` threads. Each replication depends only on its
/// index, so the output is identical for every worker count.
pub fn replicate<T, F>(reps: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return (0..reps).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..reps).into_par_iter().map(&f).collect()),
        Err(_) => (0..reps).map(f).collect(),
    }
}

/// Fallible variant of [`replicate`]; the first error in replication order wins.
pub fn try_replicate<T, E, F>(reps: usize, workers: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    replicate(reps, workers, f).into_iter().collect()
}
