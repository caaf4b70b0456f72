//! Householder QR with the orthogonal factor kept in compact form.

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::linalg::{triangular, work, RANK_TOL};

/// Compact Householder factorization `x = Q [R; 0]`.
///
/// `packed` holds `R` on and above the diagonal and the essential part of each Householder
/// vector below it (the leading unit entry is implicit). Reflector `j` is
/// `H_j = I - tau[j] v_j v_jᵀ` and `Q = H_0 H_1 ... H_{k-1}`. No sign normalization is applied
/// to the diagonal of `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    packed: DenseBlock,
    tau: Vec<f64>,
}

impl QrFactors {
    pub fn decompose(x: &DenseBlock) -> Result<Self> {
        let (n, k) = x.shape();
        if n < k {
            return Err(Error::InvalidArgument(format!("QR needs rows >= cols, got {n}x{k}")));
        }
        let mut a = x.clone();
        let mut tau = vec![0.0; k];
        let mut work_count = 0;
        for j in 0..k {
            let x0 = a[(j, j)];
            let tail_sq: f64 = (j + 1..n).map(|r| a[(r, j)] * a[(r, j)]).sum();
            work_count += n - j;
            if tail_sq == 0.0 {
                // Already upper-triangular in this column: H_j = I.
                continue;
            }
            let norm = (x0 * x0 + tail_sq).sqrt();
            let beta = if x0 >= 0.0 { -norm } else { norm };
            tau[j] = (beta - x0) / beta;
            let scale = 1.0 / (x0 - beta);
            for r in j + 1..n {
                a[(r, j)] *= scale;
            }
            a[(j, j)] = beta;
            // Apply H_j to the trailing columns.
            for c in j + 1..k {
                let mut dot = a[(j, c)];
                for r in j + 1..n {
                    dot += a[(r, j)] * a[(r, c)];
                }
                let f = tau[j] * dot;
                a[(j, c)] -= f;
                for r in j + 1..n {
                    let v = a[(r, j)];
                    a[(r, c)] -= f * v;
                }
            }
            work_count += 2 * (n - j) * (k - j - 1);
        }
        work::record(work_count);
        Ok(Self { packed: a, tau })
    }

    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    pub fn packed(&self) -> &DenseBlock {
        &self.packed
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// The `cols x cols` upper-triangular factor.
    pub fn r(&self) -> DenseBlock {
        let k = self.cols();
        DenseBlock::from_fn(k, k, |r, c| if c >= r { self.packed[(r, c)] } else { 0.0 })
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.cols()).map(|i| self.packed[(i, i)]).collect()
    }

    /// `Σ log|r_ii|`, half the log-determinant of `xᵀx`.
    pub fn log_abs_det_r(&self) -> f64 {
        self.r_diagonal().iter().map(|d| d.abs().ln()).sum()
    }

    /// Index of the first diagonal entry of `R` that fails the relative rank tolerance.
    pub fn rank_deficiency(&self) -> Option<usize> {
        triangular::first_small_pivot(&self.r_diagonal(), RANK_TOL)
    }

    /// `Qᵀ y` by successive reflections; `Q` is never formed.
    pub fn apply_qt(&self, y: &DenseBlock) -> Result<DenseBlock> {
        self.check_rows(y)?;
        let mut out = y.clone();
        for j in 0..self.cols() {
            self.reflect(j, &mut out);
        }
        Ok(out)
    }

    /// `Q y`.
    pub fn apply_q(&self, y: &DenseBlock) -> Result<DenseBlock> {
        self.check_rows(y)?;
        let mut out = y.clone();
        for j in (0..self.cols()).rev() {
            self.reflect(j, &mut out);
        }
        Ok(out)
    }

    /// `Qᵀ v` for a single vector.
    pub fn apply_qt_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_qt(&DenseBlock::column(v))?.into_vec())
    }

    /// `Q [R; 0]`, which reproduces the decomposed input up to rounding.
    pub fn reconstruct(&self) -> DenseBlock {
        let mut stacked = DenseBlock::zeros(self.rows(), self.cols());
        stacked.set_block(0, 0, &self.r());
        self.apply_q(&stacked).expect("row count matches by construction")
    }

    /// Explicit `n x n` orthogonal factor. Intended for checks, not for solving.
    pub fn explicit_q(&self) -> DenseBlock {
        self.apply_q(&DenseBlock::identity(self.rows())).expect("row count matches by construction")
    }

    fn check_rows(&self, y: &DenseBlock) -> Result<()> {
        if y.rows() != self.rows() {
            return Err(Error::InvalidArgument(format!(
                "operand has {} rows, factorization has {}",
                y.rows(),
                self.rows()
            )));
        }
        Ok(())
    }

    fn reflect(&self, j: usize, y: &mut DenseBlock) {
        let tau = self.tau[j];
        if tau == 0.0 {
            return;
        }
        let n = self.rows();
        let c = y.cols();
        let mut dots = y.row(j).to_vec();
        for r in j + 1..n {
            let v = self.packed[(r, j)];
            for (d, yv) in dots.iter_mut().zip(y.row(r)) {
                *d += v * yv;
            }
        }
        dots.iter_mut().for_each(|d| *d *= tau);
        for (yv, d) in y.row_mut(j).iter_mut().zip(&dots) {
            *yv -= d;
        }
        for r in j + 1..n {
            let v = self.packed[(r, j)];
            for (yv, d) in y.row_mut(r).iter_mut().zip(&dots) {
                *yv -= v * d;
            }
        }
        work::record(2 * (n - j) * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu::LuFactors;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseBlock {
        DenseBlock::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn tol(x: &DenseBlock) -> f64 {
        1e-10 * x.max_abs()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = QrFactors::decompose(&DenseBlock::identity(3)).unwrap();
        assert_eq!(f.r(), DenseBlock::identity(3));
        assert_eq!(f.explicit_q(), DenseBlock::identity(3));
    }

    #[test]
    fn single_column_norm() {
        let x = DenseBlock::from_rows(&[[3.0], [4.0]]).unwrap();
        let f = QrFactors::decompose(&x).unwrap();
        assert!((f.r()[(0, 0)].abs() - 5.0).abs() < 1e-15);
        let qtx = f.apply_qt(&x).unwrap();
        assert!((qtx[(0, 0)].abs() - 5.0).abs() < 1e-15);
        assert!(qtx[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn rejects_wide_input() {
        assert!(matches!(
            QrFactors::decompose(&DenseBlock::zeros(2, 3)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_block(&mut rng, 6, 3);
        let f = QrFactors::decompose(&x).unwrap();
        assert!(f.reconstruct().max_abs_diff(&x) <= tol(&x));
        let q = f.explicit_q();
        let qtq = q.tr_matmul(&q);
        assert!(qtq.max_abs_diff(&DenseBlock::identity(6)) <= 1e-10);
        let r = f.r();
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn apply_qt_matches_explicit_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_block(&mut rng, 5, 2);
        let y = random_block(&mut rng, 5, 3);
        let f = QrFactors::decompose(&x).unwrap();
        let explicit = f.explicit_q().tr_matmul(&y);
        assert!(f.apply_qt(&y).unwrap().max_abs_diff(&explicit) <= 1e-12);
        assert!(f.apply_qt(&DenseBlock::zeros(4, 1)).is_err());
        // Qᵀ x = [R; 0]
        let qtx = f.apply_qt(&x).unwrap();
        assert!(qtx.row_range(0, 2).max_abs_diff(&f.r()) <= tol(&x));
        assert!(qtx.row_range(2, 5).max_abs() <= tol(&x));
    }

    #[test]
    fn squared_diagonal_product_is_gram_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_block(&mut rng, 9, 4);
        let f = QrFactors::decompose(&x).unwrap();
        let gram = LuFactors::decompose(&x.tr_matmul(&x)).unwrap();
        let expected = gram.log_abs_det();
        assert!((2.0 * f.log_abs_det_r() - expected).abs() <= 1e-8 * expected.abs().max(1.0));
    }

    #[test]
    fn rank_deficiency_is_reported_not_repaired() {
        let x = DenseBlock::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        let f = QrFactors::decompose(&x).unwrap();
        assert_eq!(f.rank_deficiency(), Some(1));
    }
}
