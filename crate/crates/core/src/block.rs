//! Dense rectangular blocks, the atom of every structured problem.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::work;

/// Relative symmetry tolerance: a block is symmetric when `max|a - aᵀ| <= SYMMETRY_TOL * max|a|`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct DenseBlock {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseBlock {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl DenseBlock {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("block dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "block {rows}x{cols} needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a block from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "block dimensions must be positive");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = 1.0;
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = f(r, c);
            }
        }
        out
    }

    /// Column vector as an `n x 1` block.
    pub fn column(values: &[f64]) -> Self {
        Self { rows: values.len(), cols: 1, data: values.to_vec() }
            .checked()
            .expect("column vector must be non-empty")
    }

    fn checked(self) -> Result<Self> {
        Self::from_vec(self.rows, self.cols, self.data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major elements.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_to_vec(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &DenseBlock) -> DenseBlock {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        work::record(self.rows * self.cols * rhs.cols);
        out
    }

    /// `selfᵀ * rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &DenseBlock) -> DenseBlock {
        assert_eq!(self.rows, rhs.rows, "tr_matmul row mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        work::record(self.rows * self.cols * rhs.cols);
        out
    }

    /// `self * rhsᵀ` without forming the transpose.
    pub fn matmul_tr(&self, rhs: &DenseBlock) -> DenseBlock {
        assert_eq!(self.cols, rhs.cols, "matmul_tr column mismatch");
        let mut out = Self::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..rhs.rows {
                out.data[i * rhs.rows + j] = a_row.iter().zip(rhs.row(j)).map(|(a, b)| a * b).sum();
            }
        }
        work::record(self.rows * self.cols * rhs.rows);
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        work::record(self.rows * self.cols);
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `selfᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_mul_vec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * vr;
            }
        }
        work::record(self.rows * self.cols);
        out
    }

    pub fn add_assign(&mut self, rhs: &DenseBlock) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
    }

    pub fn sub_assign(&mut self, rhs: &DenseBlock) {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
    }

    pub fn sub(&self, rhs: &DenseBlock) -> DenseBlock {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }

    pub fn scale(&self, factor: f64) -> DenseBlock {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| *a *= factor);
        out
    }

    pub fn neg(&self) -> DenseBlock {
        self.scale(-1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseBlock) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `max |a_ij - a_ji|`; `None` for non-square blocks.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                worst = worst.max((self[(r, c)] - self[(c, r)]).abs());
            }
        }
        Some(worst)
    }

    /// Symmetric within the relative tolerance [`SYMMETRY_TOL`].
    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_some_and(|d| d <= SYMMETRY_TOL * self.max_abs())
    }

    /// Replaces a square block by `(a + aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square(), "symmetrize needs a square block");
        let n = self.rows;
        for r in 0..n {
            for c in r + 1..n {
                let avg = 0.5 * (self[(r, c)] + self[(c, r)]);
                self[(r, c)] = avg;
                self[(c, r)] = avg;
            }
        }
    }

    /// Rows `start..end` as a new block.
    pub fn row_range(&self, start: usize, end: usize) -> DenseBlock {
        assert!(start < end && end <= self.rows, "row range out of bounds");
        DenseBlock {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Columns `start..end` as a new block.
    pub fn col_range(&self, start: usize, end: usize) -> DenseBlock {
        assert!(start < end && end <= self.cols, "column range out of bounds");
        DenseBlock::from_fn(self.rows, end - start, |r, c| self[(r, start + c)])
    }

    /// Sub-block at rows `r0..r0+rows`, columns `c0..c0+cols`.
    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseBlock {
        DenseBlock::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseBlock) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "set_block out of bounds");
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    /// Vertical concatenation of blocks that share a column count.
    pub fn vstack<'a>(blocks: impl IntoIterator<Item = &'a DenseBlock>) -> Result<DenseBlock> {
        let mut cols = None;
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            match cols {
                None => cols = Some(b.cols),
                Some(c) if c != b.cols => {
                    return Err(Error::Shape(format!("vstack column mismatch: {c} vs {}", b.cols)))
                }
                Some(_) => {}
            }
            rows += b.rows;
            data.extend_from_slice(&b.data);
        }
        let cols = cols.ok_or_else(|| Error::Shape("vstack of nothing".into()))?;
        DenseBlock::from_vec(rows, cols, data)
    }

    /// Horizontal concatenation of blocks that share a row count.
    pub fn hstack(blocks: &[&DenseBlock]) -> Result<DenseBlock> {
        let rows = blocks.first().map(|b| b.rows).ok_or_else(|| Error::Shape("hstack of nothing".into()))?;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::Shape("hstack row mismatch".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(r));
            }
        }
        DenseBlock::from_vec(rows, cols, data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for DenseBlock {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseBlock {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

pub(crate) fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn sub_vec_assign(a: &mut [f64], b: &[f64]) {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
