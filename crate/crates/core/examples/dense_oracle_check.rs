//! Compares the streamlined solvers with a dense LU solve of the assembled matrix.

use mlsparse::oracle::oracle_problem;
use mlsparse::{generate, solve, Form, GenSpec, SolveOptions};

fn main() -> Result<(), mlsparse::Error> {
    let specs = [
        GenSpec::two_level(30, 2, 2, (30, 60), 1),
        GenSpec::two_level(30, 3, 2, (4, 8), 1).with_form(Form::General),
        GenSpec::three_level(8, 2, 2, 2, (2, 4), (30, 60), 1),
        GenSpec::three_level(8, 2, 2, 2, (2, 4), (4, 8), 1).with_form(Form::General),
    ];
    for spec in specs {
        let problem = generate(&spec)?;
        let fast = solve(&problem, SolveOptions::default())?;
        let dense = oracle_problem(&problem, 20_000)?;
        let agreement = fast.compare(&dense).expect("same shape");
        println!(
            "{:?} levels, {:?}: max relative difference {:.2e} ({})",
            spec.levels,
            spec.form,
            agreement.max_relative(),
            if agreement.within(1e-8, 1e-10) { "ok" } else { "MISMATCH" }
        );
    }
    Ok(())
}
