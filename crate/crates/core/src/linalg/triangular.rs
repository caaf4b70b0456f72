//! Substitution solves with upper-triangular factors.

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::linalg::{work, RANK_TOL};

/// First index whose magnitude is not above `tol * max|diag|`.
pub(crate) fn first_small_pivot(diag: &[f64], tol: f64) -> Option<usize> {
    let largest = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    diag.iter().position(|d| !(d.abs() > tol * largest) || !d.is_finite())
}

fn check(r: &DenseBlock, y: &DenseBlock) -> Result<()> {
    if !r.is_square() || r.rows() != y.rows() {
        return Err(Error::InvalidArgument(format!(
            "triangular solve needs square factor matching rhs rows, got {:?} and {:?}",
            r.shape(),
            y.shape()
        )));
    }
    let diag: Vec<f64> = (0..r.rows()).map(|i| r[(i, i)]).collect();
    match first_small_pivot(&diag, RANK_TOL) {
        Some(index) => Err(Error::Singular { index }),
        None => Ok(()),
    }
}

/// `R⁻¹ Y` by backward substitution. Only the upper triangle of `r` is read.
pub fn back_solve(r: &DenseBlock, y: &DenseBlock) -> Result<DenseBlock> {
    check(r, y)?;
    let k = r.rows();
    let c = y.cols();
    let mut x = y.clone();
    let data = x.as_mut_slice();
    for i in (0..k).rev() {
        let (head, tail) = data.split_at_mut((i + 1) * c);
        let row_i = &mut head[i * c..];
        for j in i + 1..k {
            let rij = r[(i, j)];
            if rij != 0.0 {
                let row_j = &tail[(j - i - 1) * c..(j - i) * c];
                row_i.iter_mut().zip(row_j).for_each(|(a, b)| *a -= rij * b);
            }
        }
        let d = r[(i, i)];
        row_i.iter_mut().for_each(|a| *a /= d);
    }
    work::record(k * (k + 1) / 2 * c);
    Ok(x)
}

/// `R⁻ᵀ Y`: solves `Rᵀ X = Y` by forward substitution.
pub fn back_solve_transposed(r: &DenseBlock, y: &DenseBlock) -> Result<DenseBlock> {
    check(r, y)?;
    let k = r.rows();
    let c = y.cols();
    let mut x = y.clone();
    let data = x.as_mut_slice();
    for i in 0..k {
        let (head, tail) = data.split_at_mut(i * c);
        let row_i = &mut tail[..c];
        for j in 0..i {
            // (Rᵀ)_{ij} = R_{ji}
            let rji = r[(j, i)];
            if rji != 0.0 {
                let row_j = &head[j * c..(j + 1) * c];
                row_i.iter_mut().zip(row_j).for_each(|(a, b)| *a -= rji * b);
            }
        }
        let d = r[(i, i)];
        row_i.iter_mut().for_each(|a| *a /= d);
    }
    work::record(k * (k + 1) / 2 * c);
    Ok(x)
}

pub fn back_solve_vec(r: &DenseBlock, y: &[f64]) -> Result<Vec<f64>> {
    Ok(back_solve(r, &DenseBlock::column(y))?.into_vec())
}

/// `R⁻¹ R⁻ᵀ`, the inverse of `RᵀR`.
pub fn gram_inverse(r: &DenseBlock) -> Result<DenseBlock> {
    let rinv_t = back_solve_transposed(r, &DenseBlock::identity(r.rows()))?;
    back_solve(r, &rinv_t)
}
