//! Execution policy for the per-group loops of the solvers.

use rayon::prelude::*;

use crate::error::Result;

/// Solver configuration.
///
/// Per-group work is a map whose results are collected in group order; every reduction over
/// groups is then performed sequentially in ascending index. Parallel and sequential runs therefore
/// give bit-identical results. The multiply-add counter only sees work done on the calling
/// thread, so use sequential mode when measuring work.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub parallel: bool,
}

impl SolveOptions {
    pub fn sequential() -> Self {
        Self { parallel: false }
    }

    pub fn parallel() -> Self {
        Self { parallel: true }
    }

    pub(crate) fn map<T, U, F>(&self, items: &[T], f: F) -> Result<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(usize, &T) -> Result<U> + Sync + Send,
    {
        if self.parallel {
            items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        } else {
            items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
        }
    }
}
