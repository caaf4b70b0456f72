//! Runs the residual checks on a correct solution and on a deliberately perturbed one.

use mlsparse::verify::verify;
use mlsparse::{generate, solve, GenSpec, Solution, SolveOptions};

fn main() -> Result<(), mlsparse::Error> {
    let problem = generate(&GenSpec::three_level(5, 2, 2, 2, (2, 4), (30, 60), 8))?;
    let mut solution = solve(&problem, SolveOptions::default())?;
    println!("correct solution:\n{}", verify(&problem, &solution, 2000)?);

    if let Solution::ThreeLevel(s) = &mut solution {
        s.x1[0] += 1e-3;
    }
    println!("x1 shifted by 1e-3:\n{}", verify(&problem, &solution, 2000)?);
    Ok(())
}
