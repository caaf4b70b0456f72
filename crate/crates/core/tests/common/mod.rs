//! Instance sets and comparison helpers shared by the integration tests.
#![allow(dead_code)]

use mlsparse::generate::{generate_three_level_general_with_counts, generate_three_level_lsq, generate_two_level_lsq};
use mlsparse::oracle::{assemble_three_level_dense, assemble_two_level_dense};
use mlsparse::linalg::LuFactors;
use mlsparse::verify::{
    three_level_inverse_residuals, three_level_max_abs, three_level_rhs_max_abs, three_level_system_residuals,
    two_level_inverse_residuals, two_level_max_abs, two_level_rhs_max_abs, two_level_system_residuals, Residual,
};
use mlsparse::{
    generate_general, Form, GenSpec, Problem, ThreeLevelLsqProblem, ThreeLevelProblem, ThreeLevelSolution,
    TwoLevelLsqProblem, TwoLevelProblem, TwoLevelSolution,
};

/// Field agreement: `max|Δ| <= REL * max|ref| + ABS`.
pub const REL: f64 = 1e-8;
pub const ABS: f64 = 1e-10;
/// Identity residuals are bounded by `RESIDUAL * max|A|`, system residuals by `RESIDUAL * max|a|`.
pub const RESIDUAL: f64 = 1e-8;
/// `|Δ log|A|| <= LOG_DET * max(|ref|, 1)`.
pub const LOG_DET: f64 = 1e-8;
/// Largest order at which determinants are cross-checked against a dense LU.
pub const DET_ORDER_LIMIT: usize = 2000;

/// 100 general-form two-level instances with m in 1..=10 and p, q in 1..=3.
pub fn two_level_general_instances() -> Vec<(GenSpec, TwoLevelProblem)> {
    (0..100)
        .map(|k| {
            let (m, p, q) = (1 + k % 10, 1 + (k / 10) % 3, 1 + (k / 30) % 3);
            let spec = GenSpec::two_level(m, p, q, (q + 1, q + 6), 1000 + k as u64).with_form(Form::General);
            match generate_general(&spec).unwrap() {
                Problem::TwoLevel(pr) => (spec, pr),
                _ => unreachable!(),
            }
        })
        .collect()
}

/// 100 general-form three-level instances with m in 1..=4, n_i in 1..=4 and p, q1, q2 in 1..=3,
/// the first one being the m = 2, n = (2, 3), p = q1 = q2 = 1 shape.
pub fn three_level_general_instances() -> Vec<(GenSpec, ThreeLevelProblem)> {
    let golden = GenSpec::three_level(2, 1, 1, 1, (1, 4), (2, 4), 77).with_form(Form::General);
    let mut out = vec![(golden.clone(), generate_three_level_general_with_counts(&golden, &[2, 3]).unwrap())];
    out.extend((0..99).map(|k| {
        let (m, p, q1, q2) = (1 + k % 4, 1 + (k / 4) % 3, 1 + (k / 12) % 3, 1 + (k / 36) % 3);
        let spec = GenSpec::three_level(m, p, q1, q2, (1, 4), (q2 + 1, q2 + 5), 2000 + k as u64).with_form(Form::General);
        match generate_general(&spec).unwrap() {
            Problem::ThreeLevel(pr) => (spec, pr),
            _ => unreachable!(),
        }
    }));
    out
}

/// 50 least-squares two-level instances with p = q = 2, rows in 30..=60, m <= 20.
pub fn two_level_lsq_instances() -> Vec<(GenSpec, TwoLevelLsqProblem)> {
    (0..50)
        .map(|k| {
            let spec = GenSpec::two_level(1 + k % 20, 2, 2, (30, 60), 3000 + k as u64);
            let pr = generate_two_level_lsq(&spec).unwrap();
            (spec, pr)
        })
        .collect()
}

/// 50 least-squares three-level instances with p = q1 = q2 = 2, rows in 30..=60, m <= 20.
pub fn three_level_lsq_instances() -> Vec<(GenSpec, ThreeLevelLsqProblem)> {
    (0..50)
        .map(|k| {
            let spec = GenSpec::three_level(1 + k % 20, 2, 2, 2, (1, 4), (30, 60), 4000 + k as u64);
            let pr = generate_three_level_lsq(&spec).unwrap();
            (spec, pr)
        })
        .collect()
}

pub fn worst(residuals: &[Residual]) -> f64 {
    residuals.iter().map(|r| r.value).fold(0.0, f64::max)
}

/// Identity and system residuals scaled by their thresholds; both must be at most 1.
pub fn two_level_residual_ratios(a: &TwoLevelProblem, s: &TwoLevelSolution) -> (f64, f64) {
    let a_max = two_level_max_abs(a);
    let inv = worst(&two_level_inverse_residuals(a, s)) / (RESIDUAL * a_max);
    let sys = worst(&two_level_system_residuals(a, s)) / (RESIDUAL * a_max.min(two_level_rhs_max_abs(a)));
    (inv, sys)
}

pub fn three_level_residual_ratios(a: &ThreeLevelProblem, s: &ThreeLevelSolution) -> (f64, f64) {
    let a_max = three_level_max_abs(a);
    let inv = worst(&three_level_inverse_residuals(a, s)) / (RESIDUAL * a_max);
    let sys = worst(&three_level_system_residuals(a, s)) / (RESIDUAL * a_max.min(three_level_rhs_max_abs(a)));
    (inv, sys)
}

pub fn dense_log_det_two(a: &TwoLevelProblem) -> Option<f64> {
    (a.order() <= DET_ORDER_LIMIT).then(|| {
        let sys = assemble_two_level_dense(a, DET_ORDER_LIMIT).unwrap();
        LuFactors::decompose(&sys.a_full).unwrap().log_abs_det()
    })
}

pub fn dense_log_det_three(a: &ThreeLevelProblem) -> Option<f64> {
    (a.order() <= DET_ORDER_LIMIT).then(|| {
        let sys = assemble_three_level_dense(a, DET_ORDER_LIMIT).unwrap();
        LuFactors::decompose(&sys.a_full).unwrap().log_abs_det()
    })
}

/// `|got - reference| / max(|reference|, 1)`.
pub fn log_det_error(got: f64, reference: f64) -> f64 {
    (got - reference).abs() / reference.abs().max(1.0)
}
