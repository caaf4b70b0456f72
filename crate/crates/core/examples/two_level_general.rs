//! Builds a small two-level system by hand and solves it.

use mlsparse::{solve_two_level, DenseBlock, TwoLevelGroup, TwoLevelProblem};

fn main() -> Result<(), mlsparse::Error> {
    let a11 = DenseBlock::from_rows(&[&[6.0, 1.0], &[1.0, 5.0]])?;
    let groups = (0..3)
        .map(|i| {
            let s = 1.0 + i as f64;
            Ok(TwoLevelGroup {
                a12: DenseBlock::from_rows(&[&[0.5, 0.0], &[0.0, 0.25 * s]])?,
                a22: DenseBlock::from_rows(&[&[2.0 + s, 0.3], &[0.3, 3.0]])?,
                rhs2: vec![s, -s],
            })
        })
        .collect::<Result<Vec<_>, mlsparse::Error>>()?;
    let problem = TwoLevelProblem::new(a11, vec![1.0, 2.0], groups)?;
    let solution = solve_two_level(&problem)?;

    println!("order {}", problem.order());
    println!("x1 = {:?}", solution.x1);
    for (i, g) in solution.groups.iter().enumerate() {
        println!("x2[{i}] = {:?}", g.x2);
    }
    println!("log|A| = {:.6}", solution.log_abs_det);
    for r in 0..solution.ainv11.rows() {
        println!("Ainv11 row {r}: {:?}", solution.ainv11.row(r));
    }
    Ok(())
}
