//! Dense kernels shared by all solvers.

pub mod lu;
pub mod qr;
pub mod triangular;
pub mod work;

pub use lu::LuFactors;
pub use qr::QrFactors;
pub use triangular::{back_solve, back_solve_transposed, back_solve_vec, gram_inverse};

/// Relative pivot tolerance for rank and singularity detection.
pub const RANK_TOL: f64 = 1e-12;
