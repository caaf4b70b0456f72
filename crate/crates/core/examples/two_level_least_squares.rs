//! Generates a grouped regression design and solves it through per-group QR.

use mlsparse::{generate, solve_two_level_lsq, GenSpec, Problem};

fn main() -> Result<(), mlsparse::Error> {
    let spec = GenSpec::two_level(50, 2, 2, (30, 60), 7);
    let Problem::TwoLevelLsq(problem) = generate(&spec)? else { unreachable!() };
    let solution = solve_two_level_lsq(&problem)?;

    println!("{} groups, {} observations", problem.m(), problem.total_rows());
    println!("global coefficients {:?}", solution.x1);
    println!("first group coefficients {:?}", solution.groups[0].x2);
    println!("log|B'B| = {:.6}", solution.log_abs_det);
    Ok(())
}
