//! Data-parallel map with a sequential fallback. With the `parallel` feature
//! disabled every call runs on the current thread.

/// Whether this build can run work in parallel.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");

/// Number of items worth scheduling at once.
pub fn width(parallel: bool) -> usize {
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::current_num_threads().max(1);
    }
    let _ = parallel;
    1
}

/// `items.iter().map(f).collect()`, spread over the rayon pool when
/// `parallel` is set. Output order always matches input order.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
