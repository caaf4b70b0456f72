use mlsparse::bench::Arm;
use mlsparse::linalg::work;
use mlsparse::{generate, solve, Form, GenSpec, SolveOptions};

fn streamlined_work(spec: &GenSpec) -> u64 {
    let problem = generate(spec).unwrap();
    work::measure(|| solve(&problem, SolveOptions::sequential()).unwrap()).1
}

#[test]
fn streamlined_work_is_linear_in_group_count() {
    let specs = [
        GenSpec::two_level(1, 2, 2, (30, 60), 21),
        GenSpec::two_level(1, 3, 2, (4, 9), 21).with_form(Form::General),
        GenSpec::three_level(1, 2, 2, 2, (2, 4), (30, 60), 21),
        GenSpec::three_level(1, 2, 3, 1, (1, 5), (3, 6), 21).with_form(Form::General),
    ];
    for spec in specs {
        let counts: Vec<u64> = [32, 64, 128, 256].iter().map(|&m| streamlined_work(&spec.clone().with_m(m))).collect();
        for w in counts.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!((1.8..=2.2).contains(&ratio), "{spec:?}: {counts:?}");
        }
    }
}

#[test]
fn work_count_is_deterministic() {
    let spec = GenSpec::three_level(20, 2, 2, 2, (2, 4), (30, 60), 4);
    assert_eq!(streamlined_work(&spec), streamlined_work(&spec));
}

#[test]
fn dense_work_grows_cubically() {
    let spec = GenSpec::two_level(1, 2, 2, (4, 8), 4).with_form(Form::General);
    let count = |m: usize| {
        let problem = generate(&spec.clone().with_m(m)).unwrap();
        work::measure(|| Arm::Naive.run(&problem, 10_000).unwrap()).1 as f64
    };
    let ratio = count(80) / count(40);
    assert!((6.0..=9.0).contains(&ratio), "naive doubling ratio {ratio}");
}
