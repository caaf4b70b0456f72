//! Brute-force reference path: assemble the full dense matrix, solve and invert it by LU, and
//! read the sub-blocks of interest back out. This is the correctness oracle for the streamlined
//! solvers and the naive arm of the benchmark; its cost is cubic in the matrix order.

use std::ops::Range;

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::linalg::LuFactors;
use crate::problem::{Problem, ThreeLevelDims, ThreeLevelProblem, TwoLevelProblem};
use crate::three_level::assemble_three_level_normal;
use crate::two_level::assemble_two_level_normal;
use crate::solution::{
    Solution, ThreeLevelCellSolution, ThreeLevelGroupSolution, ThreeLevelSolution, TwoLevelGroupSolution,
    TwoLevelSolution,
};

/// Largest dense order the oracle will assemble by default.
pub const DEFAULT_DENSE_CEILING: usize = 20_000;

/// Environment variable overriding [`DEFAULT_DENSE_CEILING`].
pub const DENSE_CEILING_ENV: &str = "MLSPARSE_DENSE_CEILING";

/// The ceiling from [`DENSE_CEILING_ENV`], or the default when unset or unparsable.
pub fn dense_ceiling_from_env() -> usize {
    std::env::var(DENSE_CEILING_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_DENSE_CEILING)
}

/// Position of a block row/column band in the full matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Global,
    Group(usize),
    Cell(usize, usize),
}

/// Row ranges of every band: global block first, then groups in ascending order, each group
/// followed by its cells in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    TwoLevel { p: usize, q: usize, m: usize },
    ThreeLevel { dims: ThreeLevelDims, counts: Vec<usize>, group_offsets: Vec<usize> },
}

impl Layout {
    pub fn two_level(p: usize, q: usize, m: usize) -> Self {
        Layout::TwoLevel { p, q, m }
    }

    pub fn three_level(dims: ThreeLevelDims, counts: Vec<usize>) -> Self {
        let mut group_offsets = Vec::with_capacity(counts.len());
        let mut at = dims.p;
        for &n in &counts {
            group_offsets.push(at);
            at += dims.q1 + n * dims.q2;
        }
        Layout::ThreeLevel { dims, counts, group_offsets }
    }

    pub fn order(&self) -> usize {
        match self {
            Layout::TwoLevel { p, q, m } => p + q * m,
            Layout::ThreeLevel { dims, counts, .. } => {
                dims.p + counts.len() * dims.q1 + dims.q2 * counts.iter().sum::<usize>()
            }
        }
    }

    /// Row range of a band. Panics on an index outside the layout.
    pub fn range(&self, band: Band) -> Range<usize> {
        match (self, band) {
            (Layout::TwoLevel { p, .. }, Band::Global) | (Layout::ThreeLevel { dims: ThreeLevelDims { p, .. }, .. }, Band::Global) => 0..*p,
            (Layout::TwoLevel { p, q, m }, Band::Group(i)) => {
                assert!(i < *m, "group {i} out of range");
                let start = p + i * q;
                start..start + q
            }
            (Layout::ThreeLevel { dims, group_offsets, .. }, Band::Group(i)) => {
                let start = group_offsets[i];
                start..start + dims.q1
            }
            (Layout::ThreeLevel { dims, counts, group_offsets }, Band::Cell(i, j)) => {
                assert!(j < counts[i], "cell ({i}, {j}) out of range");
                let start = group_offsets[i] + dims.q1 + j * dims.q2;
                start..start + dims.q2
            }
            (Layout::TwoLevel { .. }, Band::Cell(..)) => panic!("two-level layout has no cells"),
        }
    }

    /// Every band in layout order.
    pub fn bands(&self) -> Vec<Band> {
        let mut out = vec![Band::Global];
        match self {
            Layout::TwoLevel { m, .. } => out.extend((0..*m).map(Band::Group)),
            Layout::ThreeLevel { counts, .. } => {
                for (i, &n) in counts.iter().enumerate() {
                    out.push(Band::Group(i));
                    out.extend((0..n).map(|j| Band::Cell(i, j)));
                }
            }
        }
        out
    }
}

/// Fully assembled symmetric system.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub a_full: DenseBlock,
    pub rhs_full: Vec<f64>,
    pub layout: Layout,
}

impl DenseSystem {
    /// Sub-block at the intersection of two bands.
    pub fn block(&self, rows: Band, cols: Band) -> DenseBlock {
        extract(&self.a_full, &self.layout, rows, cols)
    }

    pub fn rhs(&self, band: Band) -> Vec<f64> {
        self.rhs_full[self.layout.range(band)].to_vec()
    }
}

fn extract(full: &DenseBlock, layout: &Layout, rows: Band, cols: Band) -> DenseBlock {
    let r = layout.range(rows);
    let c = layout.range(cols);
    full.sub_block(r.start, c.start, r.len(), c.len())
}

fn check_ceiling(n: usize, ceiling: usize) -> Result<()> {
    if n > ceiling {
        return Err(Error::TooLarge { n, ceiling });
    }
    Ok(())
}

struct Scatter<'a> {
    a: DenseBlock,
    rhs: Vec<f64>,
    layout: &'a Layout,
}

impl Scatter<'_> {
    fn diag(&mut self, band: Band, block: &DenseBlock, rhs: &[f64]) {
        let r = self.layout.range(band);
        self.a.set_block(r.start, r.start, block);
        self.rhs[r].copy_from_slice(rhs);
    }

    /// Places `block` at (rows, cols) and its transpose at (cols, rows).
    fn pair(&mut self, rows: Band, cols: Band, block: &DenseBlock) {
        let r = self.layout.range(rows);
        let c = self.layout.range(cols);
        self.a.set_block(r.start, c.start, block);
        self.a.set_block(c.start, r.start, &block.transpose());
    }
}

/// Dense assembly of a two-level problem, refusing orders above `ceiling`.
pub fn assemble_two_level_dense(problem: &TwoLevelProblem, ceiling: usize) -> Result<DenseSystem> {
    let layout = Layout::two_level(problem.p(), problem.q(), problem.m());
    let n = layout.order();
    check_ceiling(n, ceiling)?;
    let mut s = Scatter { a: DenseBlock::zeros(n, n), rhs: vec![0.0; n], layout: &layout };
    s.diag(Band::Global, problem.a11(), problem.rhs1());
    for (i, g) in problem.groups().iter().enumerate() {
        s.diag(Band::Group(i), &g.a22, &g.rhs2);
        s.pair(Band::Global, Band::Group(i), &g.a12);
    }
    let (a_full, rhs_full) = (s.a, s.rhs);
    Ok(DenseSystem { a_full, rhs_full, layout })
}

/// Dense assembly of a three-level problem, refusing orders above `ceiling`.
pub fn assemble_three_level_dense(problem: &ThreeLevelProblem, ceiling: usize) -> Result<DenseSystem> {
    let layout = Layout::three_level(problem.dims(), problem.cell_counts());
    let n = layout.order();
    check_ceiling(n, ceiling)?;
    let mut s = Scatter { a: DenseBlock::zeros(n, n), rhs: vec![0.0; n], layout: &layout };
    s.diag(Band::Global, problem.a11(), problem.rhs1());
    for (i, g) in problem.groups().iter().enumerate() {
        s.diag(Band::Group(i), &g.a22, &g.rhs2);
        s.pair(Band::Global, Band::Group(i), &g.a12);
        for (j, c) in g.cells.iter().enumerate() {
            s.diag(Band::Cell(i, j), &c.a22, &c.rhs2);
            s.pair(Band::Global, Band::Cell(i, j), &c.a12);
            s.pair(Band::Group(i), Band::Cell(i, j), &c.a12_group);
        }
    }
    let (a_full, rhs_full) = (s.a, s.rhs);
    Ok(DenseSystem { a_full, rhs_full, layout })
}

/// Oracle output: the full solution vector, the sub-blocks of interest and `log|A|`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub x_full: Vec<f64>,
    /// Full inverse; the blocks outside the pattern of `A` are not used further.
    pub inverse: DenseBlock,
    pub solution: Solution,
    pub log_abs_det: f64,
}

/// Solves and inverts the dense system by LU, then extracts sub-blocks via the layout.
pub fn oracle_solve(sys: &DenseSystem) -> Result<OracleOutput> {
    let lu = LuFactors::decompose(&sys.a_full)?;
    let x_full = lu.solve_vec(&sys.rhs_full)?;
    let inverse = lu.invert();
    let log_abs_det = lu.log_abs_det();
    let layout = &sys.layout;
    let x = |band| x_full[layout.range(band)].to_vec();
    let inv = |r, c| extract(&inverse, layout, r, c);

    let solution = match layout {
        Layout::TwoLevel { m, .. } => Solution::TwoLevel(TwoLevelSolution {
            x1: x(Band::Global),
            ainv11: inv(Band::Global, Band::Global),
            groups: (0..*m)
                .map(|i| TwoLevelGroupSolution {
                    x2: x(Band::Group(i)),
                    ainv12: inv(Band::Global, Band::Group(i)),
                    ainv22: inv(Band::Group(i), Band::Group(i)),
                })
                .collect(),
            log_abs_det,
        }),
        Layout::ThreeLevel { counts, .. } => Solution::ThreeLevel(ThreeLevelSolution {
            x1: x(Band::Global),
            ainv11: inv(Band::Global, Band::Global),
            groups: counts
                .iter()
                .enumerate()
                .map(|(i, &n)| ThreeLevelGroupSolution {
                    x2: x(Band::Group(i)),
                    ainv12: inv(Band::Global, Band::Group(i)),
                    ainv22: inv(Band::Group(i), Band::Group(i)),
                    cells: (0..n)
                        .map(|j| ThreeLevelCellSolution {
                            x2: x(Band::Cell(i, j)),
                            ainv12: inv(Band::Global, Band::Cell(i, j)),
                            ainv12_group: inv(Band::Group(i), Band::Cell(i, j)),
                            ainv22: inv(Band::Cell(i, j), Band::Cell(i, j)),
                        })
                        .collect(),
                })
                .collect(),
            log_abs_det,
        }),
    };
    Ok(OracleOutput { x_full: x_full.clone(), inverse, solution, log_abs_det })
}

/// Dense-oracle solution of a two-level problem.
pub fn oracle_two_level(problem: &TwoLevelProblem, ceiling: usize) -> Result<TwoLevelSolution> {
    match oracle_solve(&assemble_two_level_dense(problem, ceiling)?)?.solution {
        Solution::TwoLevel(s) => Ok(s),
        Solution::ThreeLevel(_) => unreachable!("two-level layout yields a two-level solution"),
    }
}

/// Dense-oracle solution of a three-level problem.
pub fn oracle_three_level(problem: &ThreeLevelProblem, ceiling: usize) -> Result<ThreeLevelSolution> {
    match oracle_solve(&assemble_three_level_dense(problem, ceiling)?)?.solution {
        Solution::ThreeLevel(s) => Ok(s),
        Solution::TwoLevel(_) => unreachable!("three-level layout yields a three-level solution"),
    }
}

/// Dense-oracle solution of any problem form. Least-squares problems are first turned into their
/// normal equations, which is part of the naive cost.
pub fn oracle_problem(problem: &Problem, ceiling: usize) -> Result<Solution> {
    Ok(match problem {
        Problem::TwoLevel(p) => Solution::TwoLevel(oracle_two_level(p, ceiling)?),
        Problem::TwoLevelLsq(p) => {
            check_ceiling(problem.order(), ceiling)?;
            Solution::TwoLevel(oracle_two_level(&assemble_two_level_normal(p), ceiling)?)
        }
        Problem::ThreeLevel(p) => Solution::ThreeLevel(oracle_three_level(p, ceiling)?),
        Problem::ThreeLevelLsq(p) => {
            check_ceiling(problem.order(), ceiling)?;
            Solution::ThreeLevel(oracle_three_level(&assemble_three_level_normal(p), ceiling)?)
        }
    })
}

/// Share of entries that are not exactly zero.
pub fn nonzero_fraction(a: &DenseBlock) -> f64 {
    let nz = a.as_slice().iter().filter(|v| **v != 0.0).count();
    nz as f64 / a.as_slice().len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ThreeLevelCell, ThreeLevelGroup, TwoLevelGroup};

    #[test]
    fn identity_two_level_assembles_to_identity() {
        let g = TwoLevelGroup { a12: DenseBlock::zeros(1, 1), a22: DenseBlock::identity(1), rhs2: vec![2.0] };
        let p = TwoLevelProblem::new(DenseBlock::identity(1), vec![1.0], vec![g.clone(), g]).unwrap();
        let sys = assemble_two_level_dense(&p, DEFAULT_DENSE_CEILING).unwrap();
        assert_eq!(sys.a_full, DenseBlock::identity(3));
        let out = oracle_solve(&sys).unwrap();
        assert_eq!(out.x_full, vec![1.0, 2.0, 2.0]);
        assert_eq!(out.log_abs_det, 0.0);
    }

    #[test]
    fn hand_two_by_two() {
        let p = TwoLevelProblem::new(
            DenseBlock::from_rows(&[[2.0]]).unwrap(),
            vec![2.0],
            vec![TwoLevelGroup {
                a12: DenseBlock::from_rows(&[[1.0]]).unwrap(),
                a22: DenseBlock::from_rows(&[[1.0]]).unwrap(),
                rhs2: vec![1.0],
            }],
        )
        .unwrap();
        let s = oracle_two_level(&p, DEFAULT_DENSE_CEILING).unwrap();
        assert!((s.x1[0] - 1.0).abs() < 1e-15);
        assert!(s.groups[0].x2[0].abs() < 1e-15);
    }

    #[test]
    fn ceiling_is_enforced() {
        let g = TwoLevelGroup { a12: DenseBlock::zeros(1, 1), a22: DenseBlock::identity(1), rhs2: vec![0.0] };
        let p = TwoLevelProblem::new(DenseBlock::identity(1), vec![0.0], vec![g; 5]).unwrap();
        assert!(matches!(assemble_two_level_dense(&p, 5), Err(Error::TooLarge { n: 6, ceiling: 5 })));
    }

    #[test]
    fn three_level_zero_pattern_matches_layout() {
        let dims = ThreeLevelDims { p: 1, q1: 1, q2: 1 };
        let one = DenseBlock::from_rows(&[[1.0]]).unwrap();
        let cell = ThreeLevelCell { a12: one.clone(), a12_group: one.clone(), a22: one.scale(4.0), rhs2: vec![0.0] };
        let group = |n| ThreeLevelGroup { a12: one.clone(), a22: one.scale(4.0), rhs2: vec![0.0], cells: vec![cell.clone(); n] };
        let p = ThreeLevelProblem::new(dims, one.scale(9.0), vec![0.0], vec![group(2), group(3)]).unwrap();
        let sys = assemble_three_level_dense(&p, DEFAULT_DENSE_CEILING).unwrap();
        assert_eq!(sys.a_full.shape(), (8, 8));
        // Band of each index: 0 global; 1 group 0; 2,3 cells of group 0; 4 group 1; 5,6,7 cells of group 1.
        let band = [Band::Global, Band::Group(0), Band::Cell(0, 0), Band::Cell(0, 1), Band::Group(1), Band::Cell(1, 0), Band::Cell(1, 1), Band::Cell(1, 2)];
        let group_of = |b: Band| match b {
            Band::Global => None,
            Band::Group(i) | Band::Cell(i, _) => Some(i),
        };
        for (r, &br) in band.iter().enumerate() {
            for (c, &bc) in band.iter().enumerate() {
                let nonzero_expected = r == c
                    || br == Band::Global
                    || bc == Band::Global
                    || (group_of(br) == group_of(bc)
                        && (matches!(br, Band::Group(_)) || matches!(bc, Band::Group(_))));
                assert_eq!(sys.a_full[(r, c)] != 0.0, nonzero_expected, "entry ({r}, {c})");
            }
        }
        assert_eq!(sys.layout.bands(), band.to_vec());
    }
}
