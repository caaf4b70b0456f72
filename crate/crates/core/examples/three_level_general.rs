//! Generates a three-level system and reports its solution summary.

use mlsparse::{generate, solve_three_level, Form, GenSpec, Problem};

fn main() -> Result<(), mlsparse::Error> {
    let spec = GenSpec::three_level(4, 2, 2, 3, (2, 4), (5, 9), 11).with_form(Form::General);
    let Problem::ThreeLevel(problem) = generate(&spec)? else { unreachable!() };
    let solution = solve_three_level(&problem)?;

    println!("cells per group {:?}, order {}", problem.cell_counts(), problem.order());
    println!("x1 = {:?}", solution.x1);
    for (i, g) in solution.groups.iter().enumerate() {
        println!("group {i}: x2 = {:?}, first cell x2 = {:?}", g.x2, g.cells[0].x2);
    }
    println!("log|A| = {:.6}", solution.log_abs_det);
    Ok(())
}
