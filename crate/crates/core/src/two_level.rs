//! Streamlined solvers for two-level sparse matrix problems.
//!
//! Both solvers return `x`, the inverse sub-blocks `A^{11}`, `A^{12,i}`, `A^{22,i}` and `log|A|`
//! with work linear in the number of groups `m`. The general form eliminates each `A22,i` through
//! a Schur complement; the least-squares form works directly on the design blocks through
//! per-group QR decompositions and never forms `BᵀB`.

use crate::block::{sub_vec, DenseBlock};
use crate::error::{Error, QrStage, Result};
use crate::exec::SolveOptions;
use crate::linalg::{back_solve, back_solve_transposed, back_solve_vec, gram_inverse, LuFactors, QrFactors};
use crate::problem::{TwoLevelGroup, TwoLevelLsqProblem, TwoLevelProblem};
use crate::solution::{TwoLevelGroupSolution, TwoLevelSolution};

/// Solves the general form. Requires every `A22,i` and the Schur complement to be invertible.
pub fn solve_two_level(problem: &TwoLevelProblem) -> Result<TwoLevelSolution> {
    solve_two_level_with(problem, SolveOptions::default())
}

struct Eliminated {
    lu: LuFactors,
    /// `A22⁻¹ A12ᵀ`, `q x p`.
    coupling: DenseBlock,
    /// `A12 A22⁻¹ A12ᵀ`
    schur_term: DenseBlock,
    /// `A12 A22⁻¹ a2`
    rhs_term: Vec<f64>,
}

fn eliminate(i: usize, g: &TwoLevelGroup) -> Result<Eliminated> {
    let lu = LuFactors::decompose(&g.a22).map_err(|_| Error::SingularBlock { group: i, cell: None })?;
    let coupling = lu.solve(&g.a12.transpose())?;
    let schur_term = g.a12.matmul(&coupling);
    let rhs_term = g.a12.mul_vec(&lu.solve_vec(&g.rhs2)?);
    Ok(Eliminated { lu, coupling, schur_term, rhs_term })
}

pub fn solve_two_level_with(problem: &TwoLevelProblem, options: SolveOptions) -> Result<TwoLevelSolution> {
    let groups = problem.groups();
    let eliminated = options.map(groups, eliminate)?;

    let mut schur = problem.a11().clone();
    let mut reduced_rhs = problem.rhs1().to_vec();
    for e in &eliminated {
        schur.sub_assign(&e.schur_term);
        crate::block::sub_vec_assign(&mut reduced_rhs, &e.rhs_term);
    }
    let schur_lu = LuFactors::decompose(&schur).map_err(|_| Error::SingularSchur)?;
    let mut ainv11 = schur_lu.invert();
    ainv11.symmetrize();
    let x1 = ainv11.mul_vec(&reduced_rhs);

    let per_group = options.map(groups, |i, g| {
        let e = &eliminated[i];
        let x2 = e.lu.solve_vec(&sub_vec(&g.rhs2, &g.a12.tr_mul_vec(&x1)))?;
        let ainv12 = e.coupling.matmul(&ainv11).transpose().neg();
        let mut rhs = DenseBlock::identity(problem.q());
        rhs.sub_assign(&g.a12.tr_matmul(&ainv12));
        let mut ainv22 = e.lu.solve(&rhs)?;
        ainv22.symmetrize();
        Ok(TwoLevelGroupSolution { x2, ainv12, ainv22 })
    })?;

    let log_abs_det = schur_lu.log_abs_det() + eliminated.iter().map(|e| e.lu.log_abs_det()).sum::<f64>();
    Ok(TwoLevelSolution { x1, ainv11, groups: per_group, log_abs_det })
}

/// Normal equations `A = BᵀB`, `a = Bᵀb` in two-level block form.
pub fn assemble_two_level_normal(lsq: &TwoLevelLsqProblem) -> TwoLevelProblem {
    let mut a11 = DenseBlock::zeros(lsq.p(), lsq.p());
    let mut rhs1 = vec![0.0; lsq.p()];
    let mut groups = Vec::with_capacity(lsq.m());
    for g in lsq.groups() {
        a11.add_assign(&g.b.tr_matmul(&g.b));
        rhs1.iter_mut().zip(g.b.tr_mul_vec(&g.b_vec)).for_each(|(a, v)| *a += v);
        let mut a22 = g.bdot.tr_matmul(&g.bdot);
        a22.symmetrize();
        groups.push(TwoLevelGroup { a12: g.b.tr_matmul(&g.bdot), a22, rhs2: g.bdot.tr_mul_vec(&g.b_vec) });
    }
    a11.symmetrize();
    TwoLevelProblem::new(a11, rhs1, groups).expect("assembled blocks have consistent shapes")
}

/// Splits `x` after `k` rows; the remainder is `None` when nothing is left.
pub(crate) fn split_rows(x: &DenseBlock, k: usize) -> (DenseBlock, Option<DenseBlock>) {
    let head = x.row_range(0, k);
    let tail = (x.rows() > k).then(|| x.row_range(k, x.rows()));
    (head, tail)
}

/// Replaces the remainder `[C2 | c2]` of a group by the triangular factor of its QR, which has
/// at most `cols` rows and the same Gram matrix. Stacking these instead of the full remainders
/// changes the global factor only by row signs, which cancel in every output, and keeps the
/// global stage small.
pub(crate) fn compress_remainder(tail: Option<DenseBlock>) -> Result<(usize, Option<DenseBlock>)> {
    match tail {
        Some(t) if t.rows() > t.cols() => Ok((t.rows(), Some(QrFactors::decompose(&t)?.r()))),
        Some(t) => Ok((t.rows(), Some(t))),
        None => Ok((0, None)),
    }
}

pub(crate) fn check_rank(f: &QrFactors, stage: QrStage) -> Result<DenseBlock> {
    match f.rank_deficiency() {
        Some(index) => Err(Error::RankDeficient { stage, index }),
        None => Ok(f.r()),
    }
}

pub(crate) fn map_singular(stage: QrStage) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Singular { index } => Error::RankDeficient { stage, index },
        other => other,
    }
}

/// Per-group quantities of the least-squares path after reducing by `Q_iᵀ`.
struct Reduced {
    r: DenseBlock,
    log_abs_det_r: f64,
    /// First `q` rows of `Q_iᵀ [B_i | b_i]`.
    head: DenseBlock,
    /// Compressed remaining rows, absent when `n_i = q`.
    tail: Option<DenseBlock>,
    tail_rows: usize,
}

/// Solves the least-squares form by QR decompositions only. Requires `B` to have full rank.
pub fn solve_two_level_lsq(lsq: &TwoLevelLsqProblem) -> Result<TwoLevelSolution> {
    solve_two_level_lsq_with(lsq, SolveOptions::default())
}

pub fn solve_two_level_lsq_with(lsq: &TwoLevelLsqProblem, options: SolveOptions) -> Result<TwoLevelSolution> {
    let (p, q) = (lsq.p(), lsq.q());

    let reduced = options.map(lsq.groups(), |i, g| {
        if g.rows() < q {
            return Err(Error::Shape(format!("group {i} has {} rows, fewer than q = {q}", g.rows())));
        }
        let qr = QrFactors::decompose(&g.bdot)?;
        let r = check_rank(&qr, QrStage::Group { group: i })?;
        let rhs = DenseBlock::hstack(&[&g.b, &DenseBlock::column(&g.b_vec)])?;
        let (head, tail) = split_rows(&qr.apply_qt(&rhs)?, q);
        let (tail_rows, tail) = compress_remainder(tail)?;
        Ok(Reduced { r, log_abs_det_r: qr.log_abs_det_r(), head, tail, tail_rows })
    })?;

    // Stacked remainders [C2 | c2] of all groups, in group order.
    let remainders: Vec<&DenseBlock> = reduced.iter().filter_map(|r| r.tail.as_ref()).collect();
    let stacked_rows: usize = reduced.iter().map(|r| r.tail_rows).sum();
    if stacked_rows < p {
        return Err(Error::Shape(format!("stacked remainders have {stacked_rows} rows, fewer than p = {p}")));
    }
    let stacked = DenseBlock::vstack(remainders)?;
    let global_qr = QrFactors::decompose(&stacked.col_range(0, p))?;
    let r = check_rank(&global_qr, QrStage::Global)?;
    let c = global_qr.apply_qt(&stacked.col_range(p, p + 1))?.into_vec();
    let x1 = back_solve_vec(&r, &c[..p]).map_err(map_singular(QrStage::Global))?;
    let mut ainv11 = gram_inverse(&r).map_err(map_singular(QrStage::Global))?;
    ainv11.symmetrize();

    let groups = options.map(&reduced, |i, red| {
        let stage = map_singular(QrStage::Group { group: i });
        let c1_mat = red.head.col_range(0, p);
        let c1_vec = red.head.col_to_vec(p);
        let x2 = back_solve_vec(&red.r, &sub_vec(&c1_vec, &c1_mat.mul_vec(&x1))).map_err(&stage)?;
        let g = back_solve(&red.r, &c1_mat).map_err(&stage)?;
        let ainv12 = ainv11.matmul_tr(&g).neg();
        let mut rhs = back_solve_transposed(&red.r, &DenseBlock::identity(q)).map_err(&stage)?;
        rhs.sub_assign(&c1_mat.matmul(&ainv12));
        let mut ainv22 = back_solve(&red.r, &rhs).map_err(&stage)?;
        ainv22.symmetrize();
        Ok(TwoLevelGroupSolution { x2, ainv12, ainv22 })
    })?;

    let log_abs_det = 2.0 * (global_qr.log_abs_det_r() + reduced.iter().map(|r| r.log_abs_det_r).sum::<f64>());
    Ok(TwoLevelSolution { x1, ainv11, groups, log_abs_det })
}
