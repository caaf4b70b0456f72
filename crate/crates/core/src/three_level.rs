//! Streamlined solvers for three-level sparse matrix problems.
//!
//! Each group is first reduced to a two-level-like problem by eliminating its cells, which
//! produces the group quantities `h2,i`, `H12,i`, `H22,i`; the groups are then eliminated
//! against the global block. Work is linear in the total number of cells `Σ n_i`.

use crate::block::{sub_vec, sub_vec_assign, DenseBlock};
use crate::error::{Error, QrStage, Result};
use crate::exec::SolveOptions;
use crate::linalg::{back_solve, back_solve_transposed, back_solve_vec, gram_inverse, LuFactors, QrFactors};
use crate::problem::{
    ThreeLevelCell, ThreeLevelDims, ThreeLevelGroup, ThreeLevelLsqProblem, ThreeLevelProblem,
};
use crate::solution::{ThreeLevelCellSolution, ThreeLevelGroupSolution, ThreeLevelSolution};
use crate::two_level::{check_rank, compress_remainder, map_singular, split_rows};

/// Group-level Schur quantities left after eliminating the cells of group `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HQuantities {
    /// `h2,i = a2,i - Σ_j A12,i,j A22,ij⁻¹ a2,ij`
    pub h2: Vec<f64>,
    /// `H12,i = A12,i - Σ_j A12,ij A22,ij⁻¹ A12,i,jᵀ`, `p x q1`.
    pub h12: DenseBlock,
    /// `H22,i = A22,i - Σ_j A12,i,j A22,ij⁻¹ A12,i,jᵀ`, `q1 x q1`, symmetrized.
    pub h22: DenseBlock,
}

struct CellElimination {
    lu: LuFactors,
}

struct GroupElimination {
    cells: Vec<CellElimination>,
    h: HQuantities,
    h_lu: LuFactors,
    /// `H22⁻¹ H12ᵀ`, `q1 x p`.
    h_coupling: DenseBlock,
    /// Σ_j A12,ij A22,ij⁻¹ A12,ijᵀ + H12 H22⁻¹ H12ᵀ
    schur_term: DenseBlock,
    /// Σ_j A12,ij A22,ij⁻¹ a2,ij + H12 H22⁻¹ h2
    rhs_term: Vec<f64>,
    /// log|H22,i| + Σ_j log|A22,ij|
    log_abs_det: f64,
}

fn eliminate_group(i: usize, g: &ThreeLevelGroup, p: usize) -> Result<GroupElimination> {
    let mut h2 = g.rhs2.clone();
    let mut h12 = g.a12.clone();
    let mut h22 = g.a22.clone();
    let mut schur_term = DenseBlock::zeros(p, p);
    let mut rhs_term = vec![0.0; p];
    let mut cells = Vec::with_capacity(g.cells.len());
    let mut log_abs_det = 0.0;

    for (j, c) in g.cells.iter().enumerate() {
        let lu = LuFactors::decompose(&c.a22).map_err(|_| Error::SingularBlock { group: i, cell: Some(j) })?;
        // A22⁻¹ A12ᵀ, A22⁻¹ A12,i,jᵀ and A22⁻¹ a2 from one multi-column solve.
        let rhs = DenseBlock::hstack(&[&c.a12.transpose(), &c.a12_group.transpose(), &DenseBlock::column(&c.rhs2)])?;
        let solved = lu.solve(&rhs)?;
        let q1 = g.a22.rows();
        let to_global = solved.col_range(0, p);
        let to_group = solved.col_range(p, p + q1);
        let u = solved.col_to_vec(p + q1);

        schur_term.add_assign(&c.a12.matmul(&to_global));
        rhs_term.iter_mut().zip(c.a12.mul_vec(&u)).for_each(|(a, v)| *a += v);
        h12.sub_assign(&c.a12.matmul(&to_group));
        h22.sub_assign(&c.a12_group.matmul(&to_group));
        sub_vec_assign(&mut h2, &c.a12_group.mul_vec(&u));
        log_abs_det += lu.log_abs_det();
        cells.push(CellElimination { lu });
    }
    h22.symmetrize();

    let h_lu = LuFactors::decompose(&h22).map_err(|_| Error::SingularH { group: i })?;
    let h_coupling = h_lu.solve(&h12.transpose())?;
    schur_term.add_assign(&h12.matmul(&h_coupling));
    let hu = h_lu.solve_vec(&h2)?;
    rhs_term.iter_mut().zip(h12.mul_vec(&hu)).for_each(|(a, v)| *a += v);
    log_abs_det += h_lu.log_abs_det();

    Ok(GroupElimination { cells, h: HQuantities { h2, h12, h22 }, h_lu, h_coupling, schur_term, rhs_term, log_abs_det })
}

/// Group quantities `h2,i`, `H12,i`, `H22,i` for every group.
pub fn h_quantities(problem: &ThreeLevelProblem) -> Result<Vec<HQuantities>> {
    let p = problem.dims().p;
    problem.groups().iter().enumerate().map(|(i, g)| Ok(eliminate_group(i, g, p)?.h)).collect()
}

/// Solves the general form. Requires every `A22,ij`, every `H22,i` and the final Schur complement
/// to be invertible.
pub fn solve_three_level(problem: &ThreeLevelProblem) -> Result<ThreeLevelSolution> {
    solve_three_level_with(problem, SolveOptions::default())
}

pub fn solve_three_level_with(problem: &ThreeLevelProblem, options: SolveOptions) -> Result<ThreeLevelSolution> {
    let ThreeLevelDims { p, q1, q2 } = problem.dims();
    let groups = problem.groups();
    let eliminated = options.map(groups, |i, g| eliminate_group(i, g, p))?;

    let mut schur = problem.a11().clone();
    let mut reduced_rhs = problem.rhs1().to_vec();
    for e in &eliminated {
        schur.sub_assign(&e.schur_term);
        sub_vec_assign(&mut reduced_rhs, &e.rhs_term);
    }
    let schur_lu = LuFactors::decompose(&schur).map_err(|_| Error::SingularSchur)?;
    let mut ainv11 = schur_lu.invert();
    ainv11.symmetrize();
    let x1 = ainv11.mul_vec(&reduced_rhs);

    let solved = options.map(groups, |i, g| {
        let e = &eliminated[i];
        let x2 = e.h_lu.solve_vec(&sub_vec(&e.h.h2, &e.h.h12.tr_mul_vec(&x1)))?;
        let ainv12 = e.h_coupling.matmul(&ainv11).transpose().neg();
        let mut rhs = DenseBlock::identity(q1);
        rhs.sub_assign(&e.h.h12.tr_matmul(&ainv12));
        let mut ainv22 = e.h_lu.solve(&rhs)?;
        ainv22.symmetrize();

        let cells = g
            .cells
            .iter()
            .zip(&e.cells)
            .map(|(c, ce)| solve_cell(c, ce, &x1, &x2, &ainv11, &ainv12, &ainv22, q2))
            .collect::<Result<Vec<_>>>()?;
        Ok(ThreeLevelGroupSolution { x2, ainv12, ainv22, cells })
    })?;

    let log_abs_det = schur_lu.log_abs_det() + eliminated.iter().map(|e| e.log_abs_det).sum::<f64>();
    Ok(ThreeLevelSolution { x1, ainv11, groups: solved, log_abs_det })
}

#[allow(clippy::too_many_arguments)]
fn solve_cell(
    c: &ThreeLevelCell,
    ce: &CellElimination,
    x1: &[f64],
    x2_group: &[f64],
    ainv11: &DenseBlock,
    ainv12_group: &DenseBlock,
    ainv22_group: &DenseBlock,
    q2: usize,
) -> Result<ThreeLevelCellSolution> {
    let mut r = c.rhs2.clone();
    sub_vec_assign(&mut r, &c.a12.tr_mul_vec(x1));
    sub_vec_assign(&mut r, &c.a12_group.tr_mul_vec(x2_group));
    let x2 = ce.lu.solve_vec(&r)?;

    let mut t = c.a12.tr_matmul(ainv11);
    t.add_assign(&c.a12_group.tr_matmul(&ainv12_group.transpose()));
    let ainv12 = ce.lu.solve(&t)?.transpose().neg();

    let mut t = c.a12.tr_matmul(ainv12_group);
    t.add_assign(&c.a12_group.tr_matmul(ainv22_group));
    let ainv12_group = ce.lu.solve(&t)?.transpose().neg();

    let mut t = DenseBlock::identity(q2);
    t.sub_assign(&c.a12.tr_matmul(&ainv12));
    t.sub_assign(&c.a12_group.tr_matmul(&ainv12_group));
    let mut ainv22 = ce.lu.solve(&t)?;
    ainv22.symmetrize();
    Ok(ThreeLevelCellSolution { x2, ainv12, ainv12_group, ainv22 })
}

/// Normal equations `A = BᵀB`, `a = Bᵀb` in three-level block form.
pub fn assemble_three_level_normal(lsq: &ThreeLevelLsqProblem) -> ThreeLevelProblem {
    let dims = lsq.dims();
    let ThreeLevelDims { p, q1, .. } = dims;
    let mut a11 = DenseBlock::zeros(p, p);
    let mut rhs1 = vec![0.0; p];
    let mut groups = Vec::with_capacity(lsq.m());
    for cells in lsq.groups() {
        let mut a12 = DenseBlock::zeros(p, q1);
        let mut a22 = DenseBlock::zeros(q1, q1);
        let mut rhs2 = vec![0.0; q1];
        let mut out_cells = Vec::with_capacity(cells.len());
        for c in cells {
            a11.add_assign(&c.b.tr_matmul(&c.b));
            rhs1.iter_mut().zip(c.b.tr_mul_vec(&c.b_vec)).for_each(|(a, v)| *a += v);
            a12.add_assign(&c.b.tr_matmul(&c.bdot));
            a22.add_assign(&c.bdot.tr_matmul(&c.bdot));
            rhs2.iter_mut().zip(c.bdot.tr_mul_vec(&c.b_vec)).for_each(|(a, v)| *a += v);
            let mut cell_a22 = c.bddot.tr_matmul(&c.bddot);
            cell_a22.symmetrize();
            out_cells.push(ThreeLevelCell {
                a12: c.b.tr_matmul(&c.bddot),
                a12_group: c.bdot.tr_matmul(&c.bddot),
                a22: cell_a22,
                rhs2: c.bddot.tr_mul_vec(&c.b_vec),
            });
        }
        a22.symmetrize();
        groups.push(ThreeLevelGroup { a12, a22, rhs2, cells: out_cells });
    }
    a11.symmetrize();
    ThreeLevelProblem::new(dims, a11, rhs1, groups).expect("assembled blocks have consistent shapes")
}

struct ReducedCell {
    r: DenseBlock,
    log_abs_det_r: f64,
    /// First `q2` rows of `Q_ijᵀ [B_ij | Ḃ_ij | b_ij]`, i.e. `[D1 | Ḋ1 | d1]`.
    head: DenseBlock,
}

struct ReducedGroup {
    cells: Vec<ReducedCell>,
    r: DenseBlock,
    log_abs_det_r: f64,
    /// First `q1` rows of `Q_iᵀ [stack D2 | stack d2]`, i.e. `[C1 | c1]`.
    head: DenseBlock,
    /// Compressed `[C2 | c2]`; see `compress_remainder`.
    tail: Option<DenseBlock>,
    tail_rows: usize,
}

fn reduce_group(i: usize, cells: &[crate::problem::ThreeLevelLsqCell], dims: ThreeLevelDims) -> Result<ReducedGroup> {
    let ThreeLevelDims { p, q1, q2 } = dims;
    let mut reduced_cells = Vec::with_capacity(cells.len());
    let mut tails = Vec::with_capacity(cells.len());
    for (j, c) in cells.iter().enumerate() {
        if c.rows() < q2 {
            return Err(Error::Shape(format!("cell ({i}, {j}) has {} rows, fewer than q2 = {q2}", c.rows())));
        }
        let qr = QrFactors::decompose(&c.bddot)?;
        let r = check_rank(&qr, QrStage::Cell { group: i, cell: j })?;
        let rhs = DenseBlock::hstack(&[&c.b, &c.bdot, &DenseBlock::column(&c.b_vec)])?;
        let (head, tail) = split_rows(&qr.apply_qt(&rhs)?, q2);
        if let Some(t) = tail {
            tails.push(t);
        }
        reduced_cells.push(ReducedCell { r, log_abs_det_r: qr.log_abs_det_r(), head });
    }
    // Columns of the stacked tails: [D2 (p) | Ḋ2 (q1) | d2 (1)].
    let stacked_rows: usize = tails.iter().map(DenseBlock::rows).sum();
    if stacked_rows < q1 {
        return Err(Error::Shape(format!(
            "group {i}: stacked cell remainders have {stacked_rows} rows, fewer than q1 = {q1}"
        )));
    }
    let stacked = DenseBlock::vstack(&tails)?;
    let qr = QrFactors::decompose(&stacked.col_range(p, p + q1))?;
    let r = check_rank(&qr, QrStage::Group { group: i })?;
    let rhs = DenseBlock::hstack(&[&stacked.col_range(0, p), &stacked.col_range(p + q1, p + q1 + 1)])?;
    let (head, tail) = split_rows(&qr.apply_qt(&rhs)?, q1);
    let (tail_rows, tail) = compress_remainder(tail)?;
    Ok(ReducedGroup { cells: reduced_cells, r, log_abs_det_r: qr.log_abs_det_r(), head, tail, tail_rows })
}

/// Solves the least-squares form by nested QR decompositions. Requires `B` to have full rank,
/// at least `q2` rows per cell and at least `q1` stacked remainder rows per group.
pub fn solve_three_level_lsq(lsq: &ThreeLevelLsqProblem) -> Result<ThreeLevelSolution> {
    solve_three_level_lsq_with(lsq, SolveOptions::default())
}

pub fn solve_three_level_lsq_with(lsq: &ThreeLevelLsqProblem, options: SolveOptions) -> Result<ThreeLevelSolution> {
    let dims = lsq.dims();
    let ThreeLevelDims { p, q1, q2 } = dims;
    let reduced = options.map(lsq.groups(), |i, cells| reduce_group(i, cells, dims))?;

    let remainders: Vec<&DenseBlock> = reduced.iter().filter_map(|g| g.tail.as_ref()).collect();
    let stacked_rows: usize = reduced.iter().map(|g| g.tail_rows).sum();
    if stacked_rows < p {
        return Err(Error::Shape(format!("stacked group remainders have {stacked_rows} rows, fewer than p = {p}")));
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
        let ainv12 = ainv11.matmul_tr(&back_solve(&red.r, &c1_mat).map_err(&stage)?).neg();
        let mut rhs = back_solve_transposed(&red.r, &DenseBlock::identity(q1)).map_err(&stage)?;
        rhs.sub_assign(&c1_mat.matmul(&ainv12));
        let mut ainv22 = back_solve(&red.r, &rhs).map_err(&stage)?;
        ainv22.symmetrize();

        let cells = red
            .cells
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                let stage = map_singular(QrStage::Cell { group: i, cell: j });
                let d1 = cell.head.col_range(0, p);
                let d1_dot = cell.head.col_range(p, p + q1);
                let d1_vec = cell.head.col_to_vec(p + q1);

                let mut r_vec = d1_vec;
                sub_vec_assign(&mut r_vec, &d1.mul_vec(&x1));
                sub_vec_assign(&mut r_vec, &d1_dot.mul_vec(&x2));
                let x2_cell = back_solve_vec(&cell.r, &r_vec).map_err(&stage)?;

                let mut t = d1.matmul(&ainv11);
                t.add_assign(&d1_dot.matmul(&ainv12.transpose()));
                let ainv12_cell = back_solve(&cell.r, &t).map_err(&stage)?.transpose().neg();

                let mut t = d1.matmul(&ainv12);
                t.add_assign(&d1_dot.matmul(&ainv22));
                let ainv12_cell_group = back_solve(&cell.r, &t).map_err(&stage)?.transpose().neg();

                let mut t = back_solve_transposed(&cell.r, &DenseBlock::identity(q2)).map_err(&stage)?;
                t.sub_assign(&d1.matmul(&ainv12_cell));
                t.sub_assign(&d1_dot.matmul(&ainv12_cell_group));
                let mut ainv22_cell = back_solve(&cell.r, &t).map_err(&stage)?;
                ainv22_cell.symmetrize();
                Ok(ThreeLevelCellSolution {
                    x2: x2_cell,
                    ainv12: ainv12_cell,
                    ainv12_group: ainv12_cell_group,
                    ainv22: ainv22_cell,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThreeLevelGroupSolution { x2, ainv12, ainv22, cells })
    })?;

    let log_abs_det_r = global_qr.log_abs_det_r()
        + reduced
            .iter()
            .map(|g| g.log_abs_det_r + g.cells.iter().map(|c| c.log_abs_det_r).sum::<f64>())
            .sum::<f64>();
    Ok(ThreeLevelSolution { x1, ainv11, groups, log_abs_det: 2.0 * log_abs_det_r })
}
