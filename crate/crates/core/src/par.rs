//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the `Parallel` mode runs on
//! the rayon global pool. Without it, both modes run the same sequential
//! loops. Results are identical either way: every output cell is produced
//! by exactly one closure call, and reductions are done in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a kernel should execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this mode will actually use worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Fills `out[i] = f(i)` for every index.
pub fn fill<T, F>(exec: Exec, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(i, slot)| *slot = f(i));
        return;
    }
    let _ = exec;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
