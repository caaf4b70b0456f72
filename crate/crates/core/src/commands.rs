//! File-to-file operations behind the `mlsparse` command line.

use std::path::Path;

use crate::bench::{run_bench, write_records, Arm, BenchOutcome};
use crate::error::{Error, Result};
use crate::format::{
    load_problem, load_solution, problem_kind, read_bench_config, read_gen_spec, save, write_problem, write_solution,
    SolutionFile,
};
use crate::generate::generate;
use crate::validate::Validate;
use crate::verify::{verify, VerifyReport};

/// Process exit code for a failed command: 2 for numeric failures, 1 otherwise.
pub fn exit_code(error: &Error) -> i32 {
    if error.is_numeric() {
        2
    } else {
        1
    }
}

/// Reads a generator spec and writes the generated problem.
pub fn cmd_generate(spec: &Path, out: &Path) -> Result<()> {
    let spec = read_gen_spec(&std::fs::read_to_string(spec)?)?;
    save(out, &write_problem(&generate(&spec)?))
}

/// Solves a problem file with the chosen method and writes the solution file. The naive method
/// refuses systems whose order exceeds `ceiling`.
pub fn cmd_solve(input: &Path, method: Arm, out: &Path, ceiling: usize) -> Result<SolutionFile> {
    let problem = load_problem(input)?;
    let report = problem.validate();
    if !report.is_valid() {
        return Err(Error::InvalidArgument(format!("problem fails validation:\n{report}")));
    }
    let solution = method.run(&problem, ceiling)?;
    let file = SolutionFile { method, source: problem_kind(&problem).to_string(), solution };
    save(out, &write_solution(&file))?;
    Ok(file)
}

pub fn cmd_verify(problem: &Path, solution: &Path, ceiling: usize) -> Result<VerifyReport> {
    let problem = load_problem(problem)?;
    let solution = load_solution(solution)?;
    verify(&problem, &solution.solution, ceiling)
}

/// Runs a benchmark config and writes `records.tsv` and `report.txt` into `out_dir`.
pub fn cmd_bench(config: &Path, out_dir: &Path, default_ceiling: usize, progress: impl FnMut(&str)) -> Result<BenchOutcome> {
    let config = read_bench_config(&std::fs::read_to_string(config)?, default_ceiling)?;
    let outcome = run_bench(&config, progress)?;
    std::fs::create_dir_all(out_dir)?;
    save(&out_dir.join("records.tsv"), &write_records(&outcome.records))?;
    let mut report = outcome.report.render();
    for note in &outcome.notices {
        report.push_str(&format!("# {note}\n"));
    }
    save(&out_dir.join("report.txt"), &report)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::write_gen_spec;
    use crate::generate::GenSpec;
    use crate::solution::Solution;

    #[test]
    fn generate_solve_verify_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let (spec, problem, solution) = (dir.path().join("s"), dir.path().join("p"), dir.path().join("x"));
        std::fs::write(&spec, write_gen_spec(&GenSpec::two_level(4, 2, 2, (3, 6), 42))).unwrap();
        cmd_generate(&spec, &problem).unwrap();
        let file = cmd_solve(&problem, Arm::Streamlined, &solution, 100).unwrap();
        assert!(matches!(file.solution, Solution::TwoLevel(_)));
        assert!(cmd_verify(&problem, &solution, 100).unwrap().passed());
    }

    #[test]
    fn naive_refuses_large_systems() {
        let dir = tempfile::tempdir().unwrap();
        let (spec, problem) = (dir.path().join("s"), dir.path().join("p"));
        std::fs::write(&spec, write_gen_spec(&GenSpec::two_level(4, 2, 2, (3, 6), 42))).unwrap();
        cmd_generate(&spec, &problem).unwrap();
        let err = cmd_solve(&problem, Arm::Naive, &dir.path().join("x"), 5).unwrap_err();
        assert!(matches!(err, Error::TooLarge { n: 10, ceiling: 5 }));
        assert_eq!(exit_code(&err), 1);
    }
}
