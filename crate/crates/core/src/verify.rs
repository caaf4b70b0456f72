//! Checks a solution against its problem without re-solving: the block rows of `A A^{-1} = I`
//! that only involve the returned inverse blocks, the residual of `A x = a`, symmetry of the
//! diagonal inverse blocks, and `log|A|` against a dense LU when the order allows.

use std::fmt;

use crate::block::{DenseBlock, SYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::linalg::LuFactors;
use crate::oracle::{assemble_three_level_dense, assemble_two_level_dense};
use crate::problem::{Problem, ThreeLevelProblem, TwoLevelProblem};
use crate::solution::{Solution, ThreeLevelSolution, TwoLevelSolution};
use crate::three_level::assemble_three_level_normal;
use crate::two_level::assemble_two_level_normal;

/// Identity residuals must stay below this multiple of `max|A|`, system residuals below this
/// multiple of `max|a|`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative tolerance for `log|A|`, on the scale `max(|log|A||, 1)`.
pub const LOG_DET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    InverseIdentities,
    SystemResidual,
    Symmetry,
    Determinant,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::InverseIdentities => "inverse-identities",
            Family::SystemResidual => "system-residual",
            Family::Symmetry => "symmetry",
            Family::Determinant => "determinant",
        })
    }
}

/// A named residual, the largest absolute entry over all groups and cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub family: Family,
    /// Worst measured residual, or `None` when the check was skipped.
    pub residual: Option<f64>,
    pub threshold: f64,
    pub detail: String,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.residual.is_none_or(|r| r <= self.threshold)
    }

    pub fn skipped(&self) -> bool {
        self.residual.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub families: Vec<FamilyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }

    pub fn family(&self, family: Family) -> &FamilyResult {
        self.families.iter().find(|f| f.family == family).expect("every family is reported")
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.families {
            match r.residual {
                Some(v) => {
                    let status = if r.passed() { "PASS" } else { "FAIL" };
                    writeln!(f, "{status} {:<18} residual {v:.3e} threshold {:.3e}  {}", r.family, r.threshold, r.detail)?
                }
                None => writeln!(f, "SKIP {:<18} {}", r.family, r.detail)?,
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Acc {
    items: Vec<Residual>,
}

impl Acc {
    fn push(&mut self, name: &'static str, value: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.items.iter_mut().find(|r| r.name == name) {
            Some(r) => r.value = r.value.max(value),
            None => self.items.push(Residual { name, value }),
        }
    }

    fn block(&mut self, name: &'static str, b: &DenseBlock, identity: bool) {
        let mut b = b.clone();
        if identity {
            for i in 0..b.rows() {
                b[(i, i)] -= 1.0;
            }
        }
        self.push(name, nan_max(b.as_slice()));
    }

    fn vec(&mut self, name: &'static str, v: &[f64]) {
        self.push(name, nan_max(v));
    }
}

fn nan_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

fn add(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

fn worst(items: &[Residual]) -> (f64, String) {
    let w = items.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("non-empty");
    (w.value, format!("worst: {}", w.name))
}

/// Block identities of `A A^{-1} = I` for a two-level system.
pub fn two_level_inverse_residuals(a: &TwoLevelProblem, s: &TwoLevelSolution) -> Vec<Residual> {
    let mut acc = Acc::default();
    let mut global = a.a11().matmul(&s.ainv11);
    for (g, gs) in a.groups().iter().zip(&s.groups) {
        global.add_assign(&g.a12.matmul_tr(&gs.ainv12));
        let mut diag = g.a12.tr_matmul(&gs.ainv12);
        diag.add_assign(&g.a22.matmul(&gs.ainv22));
        acc.block("inverse group-group", &diag, true);
        let mut off = g.a12.tr_matmul(&s.ainv11);
        off.add_assign(&g.a22.matmul_tr(&gs.ainv12));
        acc.block("inverse group-global", &off, false);
    }
    acc.block("inverse global-global", &global, true);
    acc.items
}

/// Residual of `A x - a` by block row for a two-level system.
pub fn two_level_system_residuals(a: &TwoLevelProblem, s: &TwoLevelSolution) -> Vec<Residual> {
    let mut acc = Acc::default();
    let mut r1 = a.a11().mul_vec(&s.x1);
    for (g, gs) in a.groups().iter().zip(&s.groups) {
        add(&mut r1, &g.a12.mul_vec(&gs.x2));
        let mut r2 = g.a12.tr_mul_vec(&s.x1);
        add(&mut r2, &g.a22.mul_vec(&gs.x2));
        r2.iter_mut().zip(&g.rhs2).for_each(|(x, b)| *x -= b);
        acc.vec("system group rows", &r2);
    }
    r1.iter_mut().zip(a.rhs1()).for_each(|(x, b)| *x -= b);
    acc.vec("system global rows", &r1);
    acc.items
}

/// Block identities of `A A^{-1} = I` for a three-level system.
pub fn three_level_inverse_residuals(a: &ThreeLevelProblem, s: &ThreeLevelSolution) -> Vec<Residual> {
    let mut acc = Acc::default();
    let mut global = a.a11().matmul(&s.ainv11);
    for (g, gs) in a.groups().iter().zip(&s.groups) {
        global.add_assign(&g.a12.matmul_tr(&gs.ainv12));
        let mut group_global = g.a12.tr_matmul(&s.ainv11);
        group_global.add_assign(&g.a22.matmul_tr(&gs.ainv12));
        let mut group_group = g.a12.tr_matmul(&gs.ainv12);
        group_group.add_assign(&g.a22.matmul(&gs.ainv22));
        for (c, cs) in g.cells.iter().zip(&gs.cells) {
            global.add_assign(&c.a12.matmul_tr(&cs.ainv12));
            group_global.add_assign(&c.a12_group.matmul_tr(&cs.ainv12));
            group_group.add_assign(&c.a12_group.matmul_tr(&cs.ainv12_group));

            let mut cell_global = c.a12.tr_matmul(&s.ainv11);
            cell_global.add_assign(&c.a12_group.tr_matmul(&gs.ainv12.transpose()));
            cell_global.add_assign(&c.a22.matmul_tr(&cs.ainv12));
            acc.block("inverse cell-global", &cell_global, false);

            let mut cell_group = c.a12.tr_matmul(&gs.ainv12);
            cell_group.add_assign(&c.a12_group.tr_matmul(&gs.ainv22));
            cell_group.add_assign(&c.a22.matmul_tr(&cs.ainv12_group));
            acc.block("inverse cell-group", &cell_group, false);

            let mut cell_cell = c.a12.tr_matmul(&cs.ainv12);
            cell_cell.add_assign(&c.a12_group.tr_matmul(&cs.ainv12_group));
            cell_cell.add_assign(&c.a22.matmul(&cs.ainv22));
            acc.block("inverse cell-cell", &cell_cell, true);
        }
        acc.block("inverse group-global", &group_global, false);
        acc.block("inverse group-group", &group_group, true);
    }
    acc.block("inverse global-global", &global, true);
    acc.items
}

/// Residual of `A x - a` by block row for a three-level system.
pub fn three_level_system_residuals(a: &ThreeLevelProblem, s: &ThreeLevelSolution) -> Vec<Residual> {
    let mut acc = Acc::default();
    let mut r1 = a.a11().mul_vec(&s.x1);
    for (g, gs) in a.groups().iter().zip(&s.groups) {
        add(&mut r1, &g.a12.mul_vec(&gs.x2));
        let mut r2 = g.a12.tr_mul_vec(&s.x1);
        add(&mut r2, &g.a22.mul_vec(&gs.x2));
        for (c, cs) in g.cells.iter().zip(&gs.cells) {
            add(&mut r1, &c.a12.mul_vec(&cs.x2));
            add(&mut r2, &c.a12_group.mul_vec(&cs.x2));
            let mut r3 = c.a12.tr_mul_vec(&s.x1);
            add(&mut r3, &c.a12_group.tr_mul_vec(&gs.x2));
            add(&mut r3, &c.a22.mul_vec(&cs.x2));
            r3.iter_mut().zip(&c.rhs2).for_each(|(x, b)| *x -= b);
            acc.vec("system cell rows", &r3);
        }
        r2.iter_mut().zip(&g.rhs2).for_each(|(x, b)| *x -= b);
        acc.vec("system group rows", &r2);
    }
    r1.iter_mut().zip(a.rhs1()).for_each(|(x, b)| *x -= b);
    acc.vec("system global rows", &r1);
    acc.items
}

/// `max|a|` over the right-hand side.
pub fn two_level_rhs_max_abs(a: &TwoLevelProblem) -> f64 {
    a.groups().iter().fold(nan_max(a.rhs1()), |m, g| m.max(nan_max(&g.rhs2)))
}

pub fn three_level_rhs_max_abs(a: &ThreeLevelProblem) -> f64 {
    a.groups().iter().fold(nan_max(a.rhs1()), |m, g| {
        g.cells.iter().fold(m.max(nan_max(&g.rhs2)), |m, c| m.max(nan_max(&c.rhs2)))
    })
}

/// `max|A|` over every stored block.
pub fn two_level_max_abs(a: &TwoLevelProblem) -> f64 {
    a.groups().iter().fold(a.a11().max_abs(), |m, g| m.max(g.a12.max_abs()).max(g.a22.max_abs()))
}

pub fn three_level_max_abs(a: &ThreeLevelProblem) -> f64 {
    a.groups().iter().fold(a.a11().max_abs(), |m, g| {
        g.cells.iter().fold(m.max(g.a12.max_abs()).max(g.a22.max_abs()), |m, c| {
            m.max(c.a12.max_abs()).max(c.a12_group.max_abs()).max(c.a22.max_abs())
        })
    })
}

/// Worst asymmetry relative to `max|block|` over the diagonal inverse blocks, with the name of
/// the worst block.
fn symmetry_residual<'a>(blocks: impl IntoIterator<Item = (&'static str, &'a DenseBlock)>) -> (f64, String) {
    blocks
        .into_iter()
        .map(|(name, b)| {
            let scale = b.max_abs();
            let asym = b.asymmetry().unwrap_or(f64::INFINITY);
            let rel = if scale > 0.0 { asym / scale } else { asym };
            (if rel.is_nan() { f64::INFINITY } else { rel }, format!("worst: {name}"))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least the global block")
}

enum General {
    Two(TwoLevelProblem),
    Three(ThreeLevelProblem),
}

fn general_form(problem: &Problem) -> General {
    match problem {
        Problem::TwoLevel(p) => General::Two(p.clone()),
        Problem::TwoLevelLsq(p) => General::Two(assemble_two_level_normal(p)),
        Problem::ThreeLevel(p) => General::Three(p.clone()),
        Problem::ThreeLevelLsq(p) => General::Three(assemble_three_level_normal(p)),
    }
}

fn shape_mismatch() -> Error {
    Error::Shape("solution does not match the problem's shape".into())
}

/// Runs all four families. Least-squares problems are checked through their normal equations.
/// The determinant family is skipped when the order exceeds `ceiling`.
pub fn verify(problem: &Problem, solution: &Solution, ceiling: usize) -> Result<VerifyReport> {
    let general = general_form(problem);
    let (inverse, system, scale, rhs_scale, sym, dense) = match (&general, solution) {
        (General::Two(a), Solution::TwoLevel(s)) => {
            check_two_level_shape(a, s)?;
            let sym = symmetry_residual(
                std::iter::once(("Ainv11", &s.ainv11)).chain(s.groups.iter().map(|g| ("Ainv22 group", &g.ainv22))),
            );
            let dense = (a.order() <= ceiling).then(|| assemble_two_level_dense(a, ceiling)).transpose()?;
            (
                two_level_inverse_residuals(a, s),
                two_level_system_residuals(a, s),
                two_level_max_abs(a),
                two_level_rhs_max_abs(a),
                sym,
                dense,
            )
        }
        (General::Three(a), Solution::ThreeLevel(s)) => {
            check_three_level_shape(a, s)?;
            let sym = symmetry_residual(
                std::iter::once(("Ainv11", &s.ainv11))
                    .chain(s.groups.iter().map(|g| ("Ainv22 group", &g.ainv22)))
                    .chain(s.groups.iter().flat_map(|g| g.cells.iter().map(|c| ("Ainv22 cell", &c.ainv22)))),
            );
            let dense = (a.order() <= ceiling).then(|| assemble_three_level_dense(a, ceiling)).transpose()?;
            (
                three_level_inverse_residuals(a, s),
                three_level_system_residuals(a, s),
                three_level_max_abs(a),
                three_level_rhs_max_abs(a),
                sym,
                dense,
            )
        }
        _ => return Err(shape_mismatch()),
    };
    let threshold = RESIDUAL_TOL * scale;
    let (inv_worst, inv_detail) = worst(&inverse);
    let (sys_worst, sys_detail) = worst(&system);
    let determinant = match dense {
        Some(sys) => {
            let reference = LuFactors::decompose(&sys.a_full).map(|lu| lu.log_abs_det());
            match reference {
                Ok(reference) => FamilyResult {
                    family: Family::Determinant,
                    residual: Some(abs_or_inf(solution.log_abs_det() - reference)),
                    threshold: LOG_DET_TOL * reference.abs().max(1.0),
                    detail: format!("dense LU log|A| = {reference:.12e}"),
                },
                Err(_) => FamilyResult {
                    family: Family::Determinant,
                    residual: Some(f64::INFINITY),
                    threshold: 0.0,
                    detail: "dense LU found the matrix singular".into(),
                },
            }
        }
        None => FamilyResult {
            family: Family::Determinant,
            residual: None,
            threshold: 0.0,
            detail: format!("order {} above dense ceiling {ceiling}", problem.order()),
        },
    };
    Ok(VerifyReport {
        families: vec![
            FamilyResult { family: Family::InverseIdentities, residual: Some(inv_worst), threshold, detail: inv_detail },
            FamilyResult {
                family: Family::SystemResidual,
                residual: Some(sys_worst),
                threshold: RESIDUAL_TOL * rhs_scale,
                detail: sys_detail,
            },
            FamilyResult { family: Family::Symmetry, residual: Some(sym.0), threshold: SYMMETRY_TOL, detail: sym.1 },
            determinant,
        ],
    })
}

fn abs_or_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.abs()
    }
}

fn check_two_level_shape(a: &TwoLevelProblem, s: &TwoLevelSolution) -> Result<()> {
    let ok = s.x1.len() == a.p()
        && s.ainv11.shape() == (a.p(), a.p())
        && s.groups.len() == a.m()
        && s.groups.iter().all(|g| {
            g.x2.len() == a.q() && g.ainv12.shape() == (a.p(), a.q()) && g.ainv22.shape() == (a.q(), a.q())
        });
    ok.then_some(()).ok_or_else(shape_mismatch)
}

fn check_three_level_shape(a: &ThreeLevelProblem, s: &ThreeLevelSolution) -> Result<()> {
    let d = a.dims();
    let ok = s.x1.len() == d.p
        && s.ainv11.shape() == (d.p, d.p)
        && s.groups.len() == a.m()
        && s.groups.iter().zip(a.groups()).all(|(g, pg)| {
            g.x2.len() == d.q1
                && g.ainv12.shape() == (d.p, d.q1)
                && g.ainv22.shape() == (d.q1, d.q1)
                && g.cells.len() == pg.cells.len()
                && g.cells.iter().all(|c| {
                    c.x2.len() == d.q2
                        && c.ainv12.shape() == (d.p, d.q2)
                        && c.ainv12_group.shape() == (d.q1, d.q2)
                        && c.ainv22.shape() == (d.q2, d.q2)
                })
        });
    ok.then_some(()).ok_or_else(shape_mismatch)
}
