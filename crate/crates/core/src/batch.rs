//! Order-preserving batch evaluation of independent jobs.
//!
//! With the `parallel` feature (default) jobs are distributed over a rayon
//! thread pool; without it, or through [`map_sequential`], they run one
//! after another. Both paths return results in input order, so output never
//! depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// [`map`] on a dedicated pool of at most `threads` workers. `None` uses the
/// global pool; `Some(1)` runs sequentially.
pub fn map_with_threads<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match threads {
        Some(0) | Some(1) => map_sequential(items, f),
        None => map(items, f),
        #[cfg(feature = "parallel")]
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| map_parallel(items, f)),
            Err(_) => map_sequential(items, f),
        },
        #[cfg(not(feature = "parallel"))]
        Some(_) => map_sequential(items, f),
    }
}
