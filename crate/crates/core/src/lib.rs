//! Direct solvers for block-sparse symmetric systems arising from two- and three-level
//! hierarchical models.
//!
//! The library solves `A x = a`, computes `log|det A|` and the blocks of `A^{-1}` that share the
//! sparsity pattern of `A`, either from the system itself ([`solve_two_level`],
//! [`solve_three_level`]) or from a least-squares design without forming `BᵀB`
//! ([`solve_two_level_lsq`], [`solve_three_level_lsq`]). Work grows linearly in the number of
//! groups. A dense reference path lives in [`oracle`].

pub mod bench;
pub mod block;
pub mod commands;
pub mod error;
pub mod exec;
pub mod format;
pub mod generate;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod solution;
pub mod sparsity;
pub mod three_level;
pub mod two_level;
pub mod validate;
pub mod verify;

pub use block::DenseBlock;
pub use error::{Error, QrStage, Result};
pub use exec::SolveOptions;
pub use generate::{generate, generate_general, generate_lsq, Form, GenSpec, Levels};
pub use problem::{
    Problem, ThreeLevelCell, ThreeLevelDims, ThreeLevelGroup, ThreeLevelLsqCell, ThreeLevelLsqProblem,
    ThreeLevelProblem, TwoLevelGroup, TwoLevelLsqGroup, TwoLevelLsqProblem, TwoLevelProblem,
};
pub use solution::{Solution, ThreeLevelSolution, TwoLevelSolution};
pub use sparsity::{exact_nonzero_fraction, sparsity_fraction, SparsityFraction};
pub use three_level::{
    assemble_three_level_normal, solve_three_level, solve_three_level_lsq, solve_three_level_lsq_with,
    solve_three_level_with,
};
pub use two_level::{
    assemble_two_level_normal, solve_two_level, solve_two_level_lsq, solve_two_level_lsq_with, solve_two_level_with,
};
pub use validate::{Validate, ValidationReport};

/// Solves any problem variant with the matching solver.
pub fn solve(problem: &Problem, options: SolveOptions) -> Result<Solution> {
    Ok(match problem {
        Problem::TwoLevel(p) => Solution::TwoLevel(solve_two_level_with(p, options)?),
        Problem::TwoLevelLsq(p) => Solution::TwoLevel(solve_two_level_lsq_with(p, options)?),
        Problem::ThreeLevel(p) => Solution::ThreeLevel(solve_three_level_with(p, options)?),
        Problem::ThreeLevelLsq(p) => Solution::ThreeLevel(solve_three_level_lsq_with(p, options)?),
    })
}
