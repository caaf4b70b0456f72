//! Block-decomposed problem types. The full matrix is never materialized here.
//!
//! Dimensions are checked when a problem is constructed; numeric conditions such as symmetry are
//! only checked by [`crate::validate`].

use crate::block::DenseBlock;
use crate::error::{Error, Result};

fn expect_shape(what: &str, block: &DenseBlock, rows: usize, cols: usize) -> Result<()> {
    if block.shape() != (rows, cols) {
        return Err(Error::Shape(format!("{what}: expected {rows}x{cols}, got {}x{}", block.rows(), block.cols())));
    }
    Ok(())
}

fn expect_len(what: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::Shape(format!("{what}: expected length {len}, got {}", v.len())));
    }
    Ok(())
}

/// Blocks belonging to one level-2 group of a two-level problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelGroup {
    /// `A12,i`, `p x q`.
    pub a12: DenseBlock,
    /// `A22,i`, `q x q`.
    pub a22: DenseBlock,
    /// `a2,i`, length `q`.
    pub rhs2: Vec<f64>,
}

/// Symmetric two-level sparse system `A x = a`: a dense `p x p` leading block, a border of
/// `p x q` blocks and a block-diagonal tail of `q x q` blocks, one per group.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelProblem {
    p: usize,
    q: usize,
    a11: DenseBlock,
    rhs1: Vec<f64>,
    groups: Vec<TwoLevelGroup>,
}

impl TwoLevelProblem {
    /// `p` is taken from `a11`, `q` from the first group; at least one group is required.
    pub fn new(a11: DenseBlock, rhs1: Vec<f64>, groups: Vec<TwoLevelGroup>) -> Result<Self> {
        let p = a11.rows();
        expect_shape("A11", &a11, p, p)?;
        expect_len("a1", &rhs1, p)?;
        let q = groups.first().ok_or_else(|| Error::Shape("two-level problem needs m >= 1".into()))?.a22.rows();
        for (i, g) in groups.iter().enumerate() {
            expect_shape(&format!("A12 of group {i}"), &g.a12, p, q)?;
            expect_shape(&format!("A22 of group {i}"), &g.a22, q, q)?;
            expect_len(&format!("a2 of group {i}"), &g.rhs2, q)?;
        }
        Ok(Self { p, q, a11, rhs1, groups })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    /// Order of the full matrix, `p + m q`.
    pub fn order(&self) -> usize {
        self.p + self.m() * self.q
    }

    pub fn a11(&self) -> &DenseBlock {
        &self.a11
    }

    pub fn rhs1(&self) -> &[f64] {
        &self.rhs1
    }

    pub fn groups(&self) -> &[TwoLevelGroup] {
        &self.groups
    }

    pub fn into_parts(self) -> (DenseBlock, Vec<f64>, Vec<TwoLevelGroup>) {
        (self.a11, self.rhs1, self.groups)
    }
}

/// Design blocks of one group in least-squares form.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelLsqGroup {
    /// `B_i`, `n_i x p`.
    pub b: DenseBlock,
    /// `Ḃ_i`, `n_i x q`.
    pub bdot: DenseBlock,
    /// `b_i`, length `n_i`.
    pub b_vec: Vec<f64>,
}

impl TwoLevelLsqGroup {
    pub fn rows(&self) -> usize {
        self.b.rows()
    }
}

/// Least-squares form `min ‖b - B x‖²` whose normal equations are a two-level problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelLsqProblem {
    p: usize,
    q: usize,
    groups: Vec<TwoLevelLsqGroup>,
}

impl TwoLevelLsqProblem {
    pub fn new(groups: Vec<TwoLevelLsqGroup>) -> Result<Self> {
        let first = groups.first().ok_or_else(|| Error::Shape("least-squares problem needs m >= 1".into()))?;
        let (p, q) = (first.b.cols(), first.bdot.cols());
        for (i, g) in groups.iter().enumerate() {
            let n = g.b.rows();
            expect_shape(&format!("B of group {i}"), &g.b, n, p)?;
            expect_shape(&format!("Bdot of group {i}"), &g.bdot, n, q)?;
            expect_len(&format!("b of group {i}"), &g.b_vec, n)?;
        }
        Ok(Self { p, q, groups })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[TwoLevelLsqGroup] {
        &self.groups
    }

    pub fn total_rows(&self) -> usize {
        self.groups.iter().map(TwoLevelLsqGroup::rows).sum()
    }

    pub fn into_groups(self) -> Vec<TwoLevelLsqGroup> {
        self.groups
    }
}

/// Dimensions shared by the three-level types: global block `p`, group blocks `q1`, cell blocks `q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeLevelDims {
    pub p: usize,
    pub q1: usize,
    pub q2: usize,
}

/// Blocks of cell `(i, j)` of a three-level problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelCell {
    /// `A12,ij`, `p x q2`: coupling to the global block.
    pub a12: DenseBlock,
    /// `A12,i,j`, `q1 x q2`: coupling to the enclosing group block.
    pub a12_group: DenseBlock,
    /// `A22,ij`, `q2 x q2`.
    pub a22: DenseBlock,
    /// `a2,ij`, length `q2`.
    pub rhs2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelGroup {
    /// `A12,i`, `p x q1`.
    pub a12: DenseBlock,
    /// `A22,i`, `q1 x q1`.
    pub a22: DenseBlock,
    /// `a2,i`, length `q1`.
    pub rhs2: Vec<f64>,
    pub cells: Vec<ThreeLevelCell>,
}

/// Symmetric three-level sparse system: every level-2 diagonal block is itself two-level sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelProblem {
    dims: ThreeLevelDims,
    a11: DenseBlock,
    rhs1: Vec<f64>,
    groups: Vec<ThreeLevelGroup>,
}

impl ThreeLevelProblem {
    pub fn new(dims: ThreeLevelDims, a11: DenseBlock, rhs1: Vec<f64>, groups: Vec<ThreeLevelGroup>) -> Result<Self> {
        let ThreeLevelDims { p, q1, q2 } = dims;
        if groups.is_empty() {
            return Err(Error::Shape("three-level problem needs m >= 1".into()));
        }
        expect_shape("A11", &a11, p, p)?;
        expect_len("a1", &rhs1, p)?;
        for (i, g) in groups.iter().enumerate() {
            expect_shape(&format!("A12 of group {i}"), &g.a12, p, q1)?;
            expect_shape(&format!("A22 of group {i}"), &g.a22, q1, q1)?;
            expect_len(&format!("a2 of group {i}"), &g.rhs2, q1)?;
            for (j, c) in g.cells.iter().enumerate() {
                expect_shape(&format!("A12 of cell ({i}, {j})"), &c.a12, p, q2)?;
                expect_shape(&format!("A12 group coupling of cell ({i}, {j})"), &c.a12_group, q1, q2)?;
                expect_shape(&format!("A22 of cell ({i}, {j})"), &c.a22, q2, q2)?;
                expect_len(&format!("a2 of cell ({i}, {j})"), &c.rhs2, q2)?;
            }
        }
        Ok(Self { dims, a11, rhs1, groups })
    }

    pub fn dims(&self) -> ThreeLevelDims {
        self.dims
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    /// Inner counts `n_i`.
    pub fn cell_counts(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.cells.len()).collect()
    }

    /// Order of the full matrix, `p + m q1 + q2 Σ n_i`.
    pub fn order(&self) -> usize {
        let ThreeLevelDims { p, q1, q2 } = self.dims;
        p + self.m() * q1 + q2 * self.cell_counts().iter().sum::<usize>()
    }

    pub fn a11(&self) -> &DenseBlock {
        &self.a11
    }

    pub fn rhs1(&self) -> &[f64] {
        &self.rhs1
    }

    pub fn groups(&self) -> &[ThreeLevelGroup] {
        &self.groups
    }

    pub fn into_parts(self) -> (ThreeLevelDims, DenseBlock, Vec<f64>, Vec<ThreeLevelGroup>) {
        (self.dims, self.a11, self.rhs1, self.groups)
    }
}

/// Design blocks of cell `(i, j)` in three-level least-squares form.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelLsqCell {
    /// `B_ij`, `o_ij x p`.
    pub b: DenseBlock,
    /// `Ḃ_ij`, `o_ij x q1`.
    pub bdot: DenseBlock,
    /// `B̈_ij`, `o_ij x q2`.
    pub bddot: DenseBlock,
    /// `b_ij`, length `o_ij`.
    pub b_vec: Vec<f64>,
}

impl ThreeLevelLsqCell {
    pub fn rows(&self) -> usize {
        self.b.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelLsqProblem {
    dims: ThreeLevelDims,
    groups: Vec<Vec<ThreeLevelLsqCell>>,
}

impl ThreeLevelLsqProblem {
    pub fn new(dims: ThreeLevelDims, groups: Vec<Vec<ThreeLevelLsqCell>>) -> Result<Self> {
        let ThreeLevelDims { p, q1, q2 } = dims;
        if groups.is_empty() {
            return Err(Error::Shape("three-level least-squares problem needs m >= 1".into()));
        }
        for (i, cells) in groups.iter().enumerate() {
            for (j, c) in cells.iter().enumerate() {
                let o = c.b.rows();
                expect_shape(&format!("B of cell ({i}, {j})"), &c.b, o, p)?;
                expect_shape(&format!("Bdot of cell ({i}, {j})"), &c.bdot, o, q1)?;
                expect_shape(&format!("Bddot of cell ({i}, {j})"), &c.bddot, o, q2)?;
                expect_len(&format!("b of cell ({i}, {j})"), &c.b_vec, o)?;
            }
        }
        Ok(Self { dims, groups })
    }

    pub fn dims(&self) -> ThreeLevelDims {
        self.dims
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn groups(&self) -> &[Vec<ThreeLevelLsqCell>] {
        &self.groups
    }

    pub fn total_rows(&self) -> usize {
        self.groups.iter().flatten().map(ThreeLevelLsqCell::rows).sum()
    }

    pub fn into_groups(self) -> Vec<Vec<ThreeLevelLsqCell>> {
        self.groups
    }
}

/// Any of the four problem forms, as read from or written to a problem file.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    TwoLevel(TwoLevelProblem),
    TwoLevelLsq(TwoLevelLsqProblem),
    ThreeLevel(ThreeLevelProblem),
    ThreeLevelLsq(ThreeLevelLsqProblem),
}

impl Problem {
    pub fn levels(&self) -> u8 {
        match self {
            Problem::TwoLevel(_) | Problem::TwoLevelLsq(_) => 2,
            Problem::ThreeLevel(_) | Problem::ThreeLevelLsq(_) => 3,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Problem::TwoLevel(p) => p.m(),
            Problem::TwoLevelLsq(p) => p.m(),
            Problem::ThreeLevel(p) => p.m(),
            Problem::ThreeLevelLsq(p) => p.m(),
        }
    }

    /// Order of the (implied) square system.
    pub fn order(&self) -> usize {
        match self {
            Problem::TwoLevel(p) => p.order(),
            Problem::TwoLevelLsq(p) => p.p() + p.m() * p.q(),
            Problem::ThreeLevel(p) => p.order(),
            Problem::ThreeLevelLsq(p) => {
                let d = p.dims();
                d.p + p.m() * d.q1 + d.q2 * p.cell_counts().iter().sum::<usize>()
            }
        }
    }
}
