//! Deterministic seeded problem generation.
//!
//! Every random quantity is drawn from its own ChaCha8 stream keyed by
//! `(seed, stream tag, i, j)`, so the draws for one group or cell never depend on the order in
//! which groups are visited. Design entries and the coefficients `x⋆` are standard normal; the
//! response is `b = B x⋆ + ε` with standard normal noise `ε`.

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::problem::{
    Problem, ThreeLevelDims, ThreeLevelLsqCell, ThreeLevelLsqProblem, ThreeLevelProblem, TwoLevelLsqGroup,
    TwoLevelLsqProblem, TwoLevelProblem,
};
use crate::three_level::assemble_three_level_normal;
use crate::two_level::assemble_two_level_normal;

/// Identifier of the random stream construction, written into generated files.
pub const GENERATOR_NAME: &str = "chacha8-keyed-v1";

/// Ridge added to every diagonal block by [`generate_general`] unless overridden.
pub const DEFAULT_RIDGE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Levels {
    Two,
    Three,
}

impl Levels {
    pub fn count(self) -> u8 {
        match self {
            Levels::Two => 2,
            Levels::Three => 3,
        }
    }
}

/// Which problem form to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    #[default]
    LeastSquares,
    General,
}

/// Generation parameters.
///
/// For two-level problems `q1` is the group dimension `q`, `q2` is unused, and `rows` bounds the
/// group row counts `n_i`. For three-level problems `inner` bounds the cell counts `n_i` and
/// `rows` bounds the cell row counts `o_ij`. Both ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub levels: Levels,
    pub m: usize,
    pub p: usize,
    pub q1: usize,
    pub q2: usize,
    pub rows: (usize, usize),
    pub inner: (usize, usize),
    pub seed: u64,
    pub ridge: f64,
    pub form: Form,
}

impl GenSpec {
    pub fn two_level(m: usize, p: usize, q: usize, rows: (usize, usize), seed: u64) -> Self {
        Self { levels: Levels::Two, m, p, q1: q, q2: 0, rows, inner: (0, 0), seed, ridge: DEFAULT_RIDGE, form: Form::LeastSquares }
    }

    pub fn three_level(
        m: usize,
        p: usize,
        q1: usize,
        q2: usize,
        inner: (usize, usize),
        rows: (usize, usize),
        seed: u64,
    ) -> Self {
        Self { levels: Levels::Three, m, p, q1, q2, rows, inner, seed, ridge: DEFAULT_RIDGE, form: Form::LeastSquares }
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    /// The innermost block dimension: `q` for two levels, `q2` for three.
    fn inner_dim(&self) -> usize {
        match self.levels {
            Levels::Two => self.q1,
            Levels::Three => self.q2,
        }
    }

    /// Checks the ranges and dimensions; the smallest row count must leave at least one row after
    /// the per-group (two-level) or per-cell (three-level) split.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.m == 0 || self.p == 0 || self.q1 == 0 || (self.levels == Levels::Three && self.q2 == 0) {
            return bad(format!("m, p and q dimensions must be positive: {self:?}"));
        }
        let (lo, hi) = self.rows;
        if lo > hi {
            return bad(format!("empty row range [{lo}, {hi}]"));
        }
        if lo < self.inner_dim() + 1 {
            return bad(format!("row range minimum {lo} must be at least {}", self.inner_dim() + 1));
        }
        if self.levels == Levels::Three {
            let (ilo, ihi) = self.inner;
            if ilo == 0 || ilo > ihi {
                return bad(format!("inner count range [{ilo}, {ihi}] must be non-empty and start at 1 or more"));
            }
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge must be finite and non-negative, got {}", self.ridge));
        }
        Ok(())
    }

    /// Least-squares instances must have enough rows for a full-rank `B` at every stage, whatever
    /// sizes are drawn.
    pub fn validate_for_lsq(&self) -> Result<()> {
        self.validate()?;
        let spare = self.rows.0 - self.inner_dim();
        let ok = match self.levels {
            Levels::Two => self.m * spare >= self.p,
            Levels::Three => {
                let group_rows = self.inner.0 * spare;
                group_rows >= self.q1 && self.m * (group_rows - self.q1) >= self.p
            }
        };
        if !ok {
            return Err(Error::InvalidSpec(format!(
                "ranges cannot guarantee a full-rank least-squares design: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    GroupSize = 0,
    CellSize = 1,
    Design = 2,
    GlobalCoef = 3,
    GroupCoef = 4,
    CellCoef = 5,
}

fn stream(seed: u64, tag: Stream, i: usize, j: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(tag as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(i as u64).to_le_bytes());
    key[24..32].copy_from_slice(&(j as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn draw_count(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(RangeInclusive::new(lo as u64, hi as u64)) as usize
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn normal_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseBlock {
    DenseBlock::from_vec(rows, cols, normal_vec(rng, rows * cols)).expect("positive dimensions")
}

/// Group row counts `n_i` of a two-level spec, or cell counts `n_i` of a three-level spec.
pub fn group_sizes(spec: &GenSpec) -> Vec<usize> {
    let range = match spec.levels {
        Levels::Two => spec.rows,
        Levels::Three => spec.inner,
    };
    (0..spec.m).map(|i| draw_count(&mut stream(spec.seed, Stream::GroupSize, i, 0), range)).collect()
}

fn add_into(target: &mut [f64], v: Vec<f64>) {
    target.iter_mut().zip(v).for_each(|(a, b)| *a += b);
}

fn raw_two_level(spec: &GenSpec) -> Result<TwoLevelLsqProblem> {
    let (p, q) = (spec.p, spec.q1);
    let x1 = normal_vec(&mut stream(spec.seed, Stream::GlobalCoef, 0, 0), p);
    let groups = group_sizes(spec)
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let x2 = normal_vec(&mut stream(spec.seed, Stream::GroupCoef, i, 0), q);
            let mut rng = stream(spec.seed, Stream::Design, i, 0);
            let b = normal_block(&mut rng, n, p);
            let bdot = normal_block(&mut rng, n, q);
            let mut b_vec = normal_vec(&mut rng, n);
            add_into(&mut b_vec, b.mul_vec(&x1));
            add_into(&mut b_vec, bdot.mul_vec(&x2));
            TwoLevelLsqGroup { b, bdot, b_vec }
        })
        .collect();
    TwoLevelLsqProblem::new(groups)
}

fn raw_three_level(spec: &GenSpec, counts: Vec<usize>) -> Result<ThreeLevelLsqProblem> {
    let dims = ThreeLevelDims { p: spec.p, q1: spec.q1, q2: spec.q2 };
    let x1 = normal_vec(&mut stream(spec.seed, Stream::GlobalCoef, 0, 0), dims.p);
    let groups = counts
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let x2 = normal_vec(&mut stream(spec.seed, Stream::GroupCoef, i, 0), dims.q1);
            (0..n)
                .map(|j| {
                    let o = draw_count(&mut stream(spec.seed, Stream::CellSize, i, j), spec.rows);
                    let x3 = normal_vec(&mut stream(spec.seed, Stream::CellCoef, i, j), dims.q2);
                    let mut rng = stream(spec.seed, Stream::Design, i, j);
                    let b = normal_block(&mut rng, o, dims.p);
                    let bdot = normal_block(&mut rng, o, dims.q1);
                    let bddot = normal_block(&mut rng, o, dims.q2);
                    let mut b_vec = normal_vec(&mut rng, o);
                    add_into(&mut b_vec, b.mul_vec(&x1));
                    add_into(&mut b_vec, bdot.mul_vec(&x2));
                    add_into(&mut b_vec, bddot.mul_vec(&x3));
                    ThreeLevelLsqCell { b, bdot, bddot, b_vec }
                })
                .collect()
        })
        .collect();
    ThreeLevelLsqProblem::new(dims, groups)
}

fn expect_levels(spec: &GenSpec, levels: Levels) -> Result<()> {
    if spec.levels != levels {
        return Err(Error::InvalidSpec(format!("expected a {}-level spec", levels.count())));
    }
    Ok(())
}

pub fn generate_two_level_lsq(spec: &GenSpec) -> Result<TwoLevelLsqProblem> {
    expect_levels(spec, Levels::Two)?;
    spec.validate_for_lsq()?;
    raw_two_level(spec)
}

pub fn generate_three_level_lsq(spec: &GenSpec) -> Result<ThreeLevelLsqProblem> {
    expect_levels(spec, Levels::Three)?;
    spec.validate_for_lsq()?;
    raw_three_level(spec, group_sizes(spec))
}

/// Like [`generate_three_level_lsq`] but with fixed cell counts; `counts.len()` replaces
/// `spec.m` and `spec.inner` is ignored. Only the basic spec checks apply, so the caller is
/// responsible for enough rows.
pub fn generate_three_level_lsq_with_counts(spec: &GenSpec, counts: &[usize]) -> Result<ThreeLevelLsqProblem> {
    expect_levels(spec, Levels::Three)?;
    let fixed = GenSpec { m: counts.len(), inner: (1, 1), ..spec.clone() };
    fixed.validate()?;
    if counts.contains(&0) {
        return Err(Error::InvalidSpec("cell counts must be positive".into()));
    }
    raw_three_level(&fixed, counts.to_vec())
}

/// Normal equations of a generated design with `ridge * I` added to every diagonal block, which
/// makes the matrix symmetric positive definite.
pub fn generate_two_level_general(spec: &GenSpec) -> Result<TwoLevelProblem> {
    expect_levels(spec, Levels::Two)?;
    spec.validate()?;
    let (mut a11, rhs1, mut groups) = assemble_two_level_normal(&raw_two_level(spec)?).into_parts();
    add_ridge(&mut a11, spec.ridge);
    for g in &mut groups {
        add_ridge(&mut g.a22, spec.ridge);
    }
    TwoLevelProblem::new(a11, rhs1, groups)
}

pub fn generate_three_level_general(spec: &GenSpec) -> Result<ThreeLevelProblem> {
    expect_levels(spec, Levels::Three)?;
    spec.validate()?;
    ridged_three_level(&raw_three_level(spec, group_sizes(spec))?, spec.ridge)
}

/// General form with fixed cell counts, as in [`generate_three_level_lsq_with_counts`].
pub fn generate_three_level_general_with_counts(spec: &GenSpec, counts: &[usize]) -> Result<ThreeLevelProblem> {
    ridged_three_level(&generate_three_level_lsq_with_counts(spec, counts)?, spec.ridge)
}

fn ridged_three_level(lsq: &ThreeLevelLsqProblem, ridge: f64) -> Result<ThreeLevelProblem> {
    let (dims, mut a11, rhs1, mut groups) = assemble_three_level_normal(lsq).into_parts();
    add_ridge(&mut a11, ridge);
    for g in &mut groups {
        add_ridge(&mut g.a22, ridge);
        for c in &mut g.cells {
            add_ridge(&mut c.a22, ridge);
        }
    }
    ThreeLevelProblem::new(dims, a11, rhs1, groups)
}

fn add_ridge(a: &mut DenseBlock, ridge: f64) {
    for i in 0..a.rows() {
        a[(i, i)] += ridge;
    }
}

/// Least-squares form of either level count.
pub fn generate_lsq(spec: &GenSpec) -> Result<Problem> {
    match spec.levels {
        Levels::Two => generate_two_level_lsq(spec).map(Problem::TwoLevelLsq),
        Levels::Three => generate_three_level_lsq(spec).map(Problem::ThreeLevelLsq),
    }
}

/// General form of either level count.
pub fn generate_general(spec: &GenSpec) -> Result<Problem> {
    match spec.levels {
        Levels::Two => generate_two_level_general(spec).map(Problem::TwoLevel),
        Levels::Three => generate_three_level_general(spec).map(Problem::ThreeLevel),
    }
}

/// The form selected by `spec.form`.
pub fn generate(spec: &GenSpec) -> Result<Problem> {
    match spec.form {
        Form::LeastSquares => generate_lsq(spec),
        Form::General => generate_general(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::Validate;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let spec = GenSpec::two_level(5, 2, 2, (3, 6), 42);
        assert_eq!(generate_lsq(&spec).unwrap(), generate_lsq(&spec).unwrap());
        assert_ne!(generate_lsq(&spec).unwrap(), generate_lsq(&spec.clone().with_seed(43)).unwrap());
    }

    #[test]
    fn group_draws_do_not_depend_on_m() {
        let small = generate_two_level_lsq(&GenSpec::two_level(3, 2, 2, (3, 6), 9)).unwrap();
        let large = generate_two_level_lsq(&GenSpec::two_level(7, 2, 2, (3, 6), 9)).unwrap();
        assert_eq!(small.groups(), &large.groups()[..3]);
    }

    #[test]
    fn rejects_row_minimum_below_split() {
        let spec = GenSpec::two_level(3, 2, 2, (1, 2), 1);
        assert!(matches!(generate_lsq(&spec), Err(Error::InvalidSpec(_))));
        assert!(matches!(GenSpec::two_level(3, 2, 2, (5, 4), 1).validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn lsq_requires_guaranteed_rank() {
        // one group with a single spare row cannot support p = 2
        let spec = GenSpec::two_level(1, 2, 2, (3, 3), 1);
        assert!(generate_lsq(&spec).is_err());
        assert!(generate_general(&spec).is_ok());
        let spec = GenSpec::three_level(2, 1, 3, 1, (1, 2), (2, 3), 1);
        assert!(generate_lsq(&spec).is_err());
        assert!(generate_general(&spec).is_ok());
    }

    #[test]
    fn sizes_honor_ranges_and_hit_both_ends() {
        let spec = GenSpec::two_level(2000, 1, 1, (30, 60), 3);
        let sizes = group_sizes(&spec);
        assert!(sizes.iter().all(|n| (30..=60).contains(n)));
        assert!(sizes.contains(&30) && sizes.contains(&60));
    }

    #[test]
    fn fixed_counts_are_honored() {
        let spec = GenSpec::three_level(9, 1, 1, 1, (1, 1), (2, 3), 4);
        let p = generate_three_level_general_with_counts(&spec, &[2, 3]).unwrap();
        assert_eq!((p.cell_counts(), p.order()), (vec![2, 3], 8));
        assert!(generate_three_level_lsq_with_counts(&spec, &[2, 0]).is_err());
    }

    #[test]
    fn general_output_is_valid() {
        let spec = GenSpec::three_level(3, 2, 2, 1, (1, 3), (2, 4), 5).with_form(Form::General);
        let problem = generate(&spec).unwrap();
        assert!(problem.validate().is_valid());
        assert_eq!(problem.levels(), 3);
    }
}
