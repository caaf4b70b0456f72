use std::path::PathBuf;

use mlsparse::format::{
    load_problem, load_solution, read_gen_spec, read_problem, read_solution, write_gen_spec, write_problem, write_solution,
    SolutionFile,
};
use mlsparse::{generate, solve, Error, Form, GenSpec, SolveOptions};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn golden_spec_parses_and_reprints_identically() {
    let text = std::fs::read_to_string(golden("two_level_m3_seed42.spec")).unwrap();
    let spec = read_gen_spec(&text).unwrap();
    assert_eq!(spec, GenSpec::two_level(3, 2, 2, (3, 6), 42));
    assert_eq!(write_gen_spec(&spec), text);
}

#[test]
fn golden_problem_matches_generator() {
    let problem = load_problem(&golden("two_level_m3_seed42.problem")).unwrap();
    assert_eq!(problem, generate(&GenSpec::two_level(3, 2, 2, (3, 6), 42)).unwrap());
}

#[test]
fn golden_solution_matches_fresh_solve() {
    let problem = load_problem(&golden("two_level_m3_seed42.problem")).unwrap();
    let stored = load_solution(&golden("two_level_m3_seed42.solution")).unwrap();
    let fresh = solve(&problem, SolveOptions::default()).unwrap();
    assert_eq!(stored.solution, fresh);
    let text = std::fs::read_to_string(golden("two_level_m3_seed42.solution")).unwrap();
    assert_eq!(write_solution(&stored), text);
}

#[test]
fn every_problem_kind_round_trips_exactly() {
    let specs = [
        GenSpec::two_level(4, 2, 3, (5, 9), 1),
        GenSpec::two_level(4, 2, 3, (5, 9), 1).with_form(Form::General),
        GenSpec::three_level(3, 2, 1, 2, (1, 4), (5, 9), 1),
        GenSpec::three_level(3, 2, 1, 2, (1, 4), (5, 9), 1).with_form(Form::General),
    ];
    for spec in specs {
        let problem = generate(&spec).unwrap();
        let text = write_problem(&problem);
        assert_eq!(read_problem(&text).unwrap(), problem);
        let file = SolutionFile {
            method: mlsparse::bench::Arm::Streamlined,
            source: mlsparse::format::problem_kind(&problem).into(),
            solution: solve(&problem, SolveOptions::default()).unwrap(),
        };
        let text = write_solution(&file);
        let back = read_solution(&text).unwrap();
        assert_eq!(back.solution, file.solution);
        assert_eq!(write_solution(&back), text);
    }
}

#[test]
fn malformed_input_is_a_parse_error() {
    let good = write_problem(&generate(&GenSpec::two_level(2, 1, 1, (2, 3), 1)).unwrap());
    let cases = [
        String::new(),
        good.replacen("MLSPARSE v1", "MLSPARSE v9", 1),
        good.replacen("kind ", "kind bogus-", 1),
        good.lines().take(5).collect::<Vec<_>>().join("\n"),
        good.replacen("e", "q", 3),
    ];
    for text in cases {
        assert!(matches!(read_problem(&text), Err(Error::Parse { .. })), "{text:?}");
    }
}
