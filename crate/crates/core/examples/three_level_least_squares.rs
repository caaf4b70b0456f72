//! Nested regression design solved by QR at the cell, group and global levels.

use mlsparse::{generate, solve_three_level_lsq, GenSpec, Problem};

fn main() -> Result<(), mlsparse::Error> {
    let spec = GenSpec::three_level(20, 2, 2, 2, (2, 4), (30, 60), 3);
    let Problem::ThreeLevelLsq(problem) = generate(&spec)? else { unreachable!() };
    let solution = solve_three_level_lsq(&problem)?;
    let cells: usize = solution.groups.iter().map(|g| g.cells.len()).sum();

    println!("{} groups, {cells} cells", problem.m());
    println!("global coefficients {:?}", solution.x1);
    println!("log|B'B| = {:.6}", solution.log_abs_det);
    Ok(())
}
