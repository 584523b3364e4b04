//! Execution policy for the data-parallel loops (frequency grids, likelihood
//! sums, finite-difference stencils, path ensembles).
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] runs
//! sequentially. Results are identical under both policies: every loop body
//! is a pure function of its index and reductions are done in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is by index.
pub fn map<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Sum of `f(i)` for `i < n`, added in index order so the result does not
/// depend on the policy.
pub fn sum<F>(n: usize, exec: Execution, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map(n, exec, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.1).sin() / (1.0 + i as f64);
        let a = sum(10_000, Execution::Sequential, f);
        let b = sum(10_000, Execution::Parallel, f);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(map(7, Execution::Parallel, |i| i * i), vec![0, 1, 4, 9, 16, 25, 36]);
    }
}
