//! Writes a generator spec, the problem it produces and its solution to a temp directory,
//! then reads them back.

use mlsparse::bench::Arm;
use mlsparse::format::{
    load_problem, load_solution, problem_kind, read_gen_spec, save, write_gen_spec, write_problem, write_solution,
    SolutionFile,
};
use mlsparse::{generate, solve, GenSpec, SolveOptions};

fn main() -> Result<(), mlsparse::Error> {
    let dir = std::env::temp_dir().join("mlsparse-example");
    std::fs::create_dir_all(&dir)?;

    let spec = GenSpec::two_level(3, 2, 2, (3, 6), 42);
    let spec_text = write_gen_spec(&spec);
    assert_eq!(read_gen_spec(&spec_text)?, spec);
    save(&dir.join("demo.spec"), &spec_text)?;

    let problem = generate(&spec)?;
    save(&dir.join("demo.problem"), &write_problem(&problem))?;
    let file = SolutionFile {
        method: Arm::Streamlined,
        source: problem_kind(&problem).to_string(),
        solution: solve(&problem, SolveOptions::default())?,
    };
    save(&dir.join("demo.solution"), &write_solution(&file))?;

    assert_eq!(load_problem(&dir.join("demo.problem"))?, problem);
    assert_eq!(load_solution(&dir.join("demo.solution"))?.solution, file.solution);
    println!("wrote and re-read spec, problem and solution in {}", dir.display());
    println!("{spec_text}");
    Ok(())
}
