//! LU with partial pivoting. Used for the small per-group inversions of the general-form solvers
//! and as the brute-force backend of the dense oracle.

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::linalg::{work, RANK_TOL};

/// `P a = L U` with `L` unit lower-triangular, both packed into one block.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    packed: DenseBlock,
    /// Row swapped with row `k` at elimination step `k`.
    pivots: Vec<usize>,
    sign: f64,
}

impl LuFactors {
    pub fn decompose(a: &DenseBlock) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!("LU needs a square block, got {:?}", a.shape())));
        }
        let n = a.rows();
        let threshold = RANK_TOL * a.max_abs();
        let mut lu = a.clone();
        let mut pivots = Vec::with_capacity(n);
        let mut sign = 1.0;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|r| (r, lu[(r, k)].abs()))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if !(best > threshold) {
                return Err(Error::Singular { index: k });
            }
            pivots.push(p);
            if p != k {
                sign = -sign;
                let data = lu.as_mut_slice();
                let (upper, lower) = data.split_at_mut(p * n);
                upper[k * n..(k + 1) * n].swap_with_slice(&mut lower[..n]);
            }
            let pivot = lu[(k, k)];
            let data = lu.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let row_k = &head[k * n + k + 1..(k + 1) * n];
            for r in 0..n - k - 1 {
                let row = &mut tail[r * n..(r + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    row[k + 1..].iter_mut().zip(row_k).for_each(|(a, u)| *a -= l * u);
                }
            }
            work::record((n - k - 1) * (n - k));
        }
        Ok(Self { packed: lu, pivots, sign })
    }

    pub fn order(&self) -> usize {
        self.packed.rows()
    }

    pub fn packed(&self) -> &DenseBlock {
        &self.packed
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Sign of the determinant.
    pub fn sign(&self) -> f64 {
        self.sign * self.diagonal().iter().map(|d| d.signum()).product::<f64>()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self.packed[(i, i)]).collect()
    }

    /// `Σ log|u_ii|`.
    pub fn log_abs_det(&self) -> f64 {
        self.diagonal().iter().map(|d| d.abs().ln()).sum()
    }

    /// `a⁻¹ y`.
    pub fn solve(&self, y: &DenseBlock) -> Result<DenseBlock> {
        let n = self.order();
        if y.rows() != n {
            return Err(Error::InvalidArgument(format!("rhs has {} rows, LU order is {n}", y.rows())));
        }
        let c = y.cols();
        let mut x = y.clone();
        let data = x.as_mut_slice();
        for (k, &p) in self.pivots.iter().enumerate() {
            if p != k {
                let (upper, lower) = data.split_at_mut(p * c);
                upper[k * c..(k + 1) * c].swap_with_slice(&mut lower[..c]);
            }
        }
        for i in 0..n {
            let (head, tail) = data.split_at_mut(i * c);
            let row_i = &mut tail[..c];
            for (j, &l) in self.packed.row(i)[..i].iter().enumerate() {
                if l != 0.0 {
                    row_i.iter_mut().zip(&head[j * c..(j + 1) * c]).for_each(|(a, b)| *a -= l * b);
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * c);
            let row_i = &mut head[i * c..];
            let lu_row = self.packed.row(i);
            for j in i + 1..n {
                let u = lu_row[j];
                if u != 0.0 {
                    let row_j = &tail[(j - i - 1) * c..(j - i) * c];
                    row_i.iter_mut().zip(row_j).for_each(|(a, b)| *a -= u * b);
                }
            }
            let d = lu_row[i];
            row_i.iter_mut().for_each(|a| *a /= d);
        }
        work::record(n * n * c);
        Ok(x)
    }

    pub fn solve_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve(&DenseBlock::column(y))?.into_vec())
    }

    pub fn invert(&self) -> DenseBlock {
        self.solve(&DenseBlock::identity(self.order())).expect("identity matches the LU order")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity() {
        let f = LuFactors::decompose(&DenseBlock::identity(4)).unwrap();
        assert_eq!(f.log_abs_det(), 0.0);
        assert_eq!(f.invert(), DenseBlock::identity(4));
        assert_eq!(f.sign(), 1.0);
    }

    #[test]
    fn diagonal() {
        let a = DenseBlock::from_rows(&[[2.0, 0.0], [0.0, 4.0]]).unwrap();
        let f = LuFactors::decompose(&a).unwrap();
        assert!((f.log_abs_det() - 8f64.ln()).abs() < 1e-15);
        assert_eq!(f.invert(), DenseBlock::from_rows(&[[0.5, 0.0], [0.0, 0.25]]).unwrap());
    }

    #[test]
    fn pivoting_tracks_sign() {
        let a = DenseBlock::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let f = LuFactors::decompose(&a).unwrap();
        assert_eq!(f.sign(), -1.0);
        assert_eq!(f.solve_vec(&[3.0, 5.0]).unwrap(), vec![5.0, 3.0]);
    }

    #[test]
    fn random_spd_inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = DenseBlock::from_fn(8, 8, |_, _| StandardNormal.sample(&mut rng));
        let mut a = g.tr_matmul(&g);
        a.add_assign(&DenseBlock::identity(8));
        let f = LuFactors::decompose(&a).unwrap();
        let inv = f.invert();
        assert!(inv.matmul(&a).max_abs_diff(&DenseBlock::identity(8)) <= 1e-8);
        let y = DenseBlock::from_fn(8, 2, |_, _| StandardNormal.sample(&mut rng));
        assert!(inv.matmul(&y).max_abs_diff(&f.solve(&y).unwrap()) <= 1e-8);
    }

    #[test]
    fn singular_reports_column() {
        let a = DenseBlock::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(LuFactors::decompose(&a), Err(Error::Singular { index: 1 })));
        assert!(matches!(LuFactors::decompose(&DenseBlock::zeros(3, 3)), Err(Error::Singular { index: 0 })));
    }
}
