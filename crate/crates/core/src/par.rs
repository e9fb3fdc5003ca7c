//! Execution policy for the data-parallel loops (per-cell assembly, reference
//! tensor rows, all-pairs relations).
//!
//! With the `parallel` feature (default) loops run on the rayon pool; without
//! it every policy degrades to a plain sequential iterator.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// `true` when loops will actually be distributed over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }
}

/// Evaluate `f` on `0..n` and collect the results in index order.
pub fn map_range<T, F>(policy: ExecPolicy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if policy.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = policy;
    (0..n).map(f).collect()
}

/// Sort in place, in parallel when allowed.
pub fn sort_unstable_by_key<T, K, F>(policy: ExecPolicy, data: &mut [T], key: F)
where
    T: Send,
    K: Ord,
    F: Fn(&T) -> K + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if policy.is_parallel() {
            use rayon::prelude::*;
            data.par_sort_unstable_by_key(key);
            return;
        }
    }
    let _ = policy;
    data.sort_unstable_by_key(key);
}
