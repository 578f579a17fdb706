//! Work distribution for embarrassingly parallel loops.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! returns results in index order. Reductions then run sequentially over that
//! vector, so outputs are bit-identical for any worker count. Without the
//! `parallel` feature, [`Execution::Parallel`] silently runs sequentially.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually fan out.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `(0..n).map(f)` collected in index order, possibly on a thread pool.
pub fn map_indexed<T, F>(execution: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
