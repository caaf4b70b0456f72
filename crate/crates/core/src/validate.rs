//! Numeric invariant checks. Violations are returned as diagnostics, never as errors.

use std::fmt;

use crate::block::{DenseBlock, SYMMETRY_TOL};
use crate::problem::{
    Problem, ThreeLevelDims, ThreeLevelLsqProblem, ThreeLevelProblem, TwoLevelLsqProblem, TwoLevelProblem,
};

/// Where in the block hierarchy a violation sits. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Global,
    Group(usize),
    Cell(usize, usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Global => f.write_str("global block"),
            Location::Group(i) => write!(f, "level-2 block {i}"),
            Location::Cell(i, j) => write!(f, "level-3 block ({i}, {j})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// A block that must be symmetric is not, within the relative tolerance.
    Asymmetric { block: &'static str },
    NonFinite { block: &'static str },
    /// Fewer rows than columns, so the design cannot have full column rank.
    RowShortfall { block: &'static str },
    /// A group with no cells.
    EmptyGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub location: Location,
    pub kind: ViolationKind,
    /// Measured size of the violation: the asymmetry `max|a - aᵀ|`, or the row shortfall.
    pub discrepancy: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Asymmetric { block } => {
                write!(f, "{}: {block} not symmetric (max |a - aT| = {:e})", self.location, self.discrepancy)
            }
            ViolationKind::NonFinite { block } => write!(f, "{}: {block} has non-finite entries", self.location),
            ViolationKind::RowShortfall { block } => {
                write!(f, "{}: {block} is short of {} rows for full rank", self.location, self.discrepancy)
            }
            ViolationKind::EmptyGroup => write!(f, "{}: group has no cells", self.location),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn symmetric(&mut self, location: Location, block: &'static str, a: &DenseBlock) {
        self.finite(location, block, a);
        if let Some(d) = a.asymmetry() {
            if d > SYMMETRY_TOL * a.max_abs() {
                self.violations.push(Violation { location, kind: ViolationKind::Asymmetric { block }, discrepancy: d });
            }
        }
    }

    fn finite(&mut self, location: Location, block: &'static str, a: &DenseBlock) {
        if !a.is_finite() {
            self.violations.push(Violation { location, kind: ViolationKind::NonFinite { block }, discrepancy: f64::NAN });
        }
    }

    fn finite_vec(&mut self, location: Location, block: &'static str, v: &[f64]) {
        if v.iter().any(|x| !x.is_finite()) {
            self.violations.push(Violation { location, kind: ViolationKind::NonFinite { block }, discrepancy: f64::NAN });
        }
    }

    fn rows_at_least(&mut self, location: Location, block: &'static str, have: usize, need: usize) {
        if have < need {
            self.violations.push(Violation {
                location,
                kind: ViolationKind::RowShortfall { block },
                discrepancy: (need - have) as f64,
            });
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Every invariant violation of a problem; an empty report means valid.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

impl Validate for TwoLevelProblem {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.symmetric(Location::Global, "A11", self.a11());
        r.finite_vec(Location::Global, "a1", self.rhs1());
        for (i, g) in self.groups().iter().enumerate() {
            r.finite(Location::Group(i), "A12", &g.a12);
            r.symmetric(Location::Group(i), "A22", &g.a22);
            r.finite_vec(Location::Group(i), "a2", &g.rhs2);
        }
        r
    }
}

impl Validate for TwoLevelLsqProblem {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        for (i, g) in self.groups().iter().enumerate() {
            r.finite(Location::Group(i), "B", &g.b);
            r.finite(Location::Group(i), "Bdot", &g.bdot);
            r.finite_vec(Location::Group(i), "b", &g.b_vec);
            r.rows_at_least(Location::Group(i), "Bdot", g.rows(), self.q());
        }
        r.rows_at_least(Location::Global, "B", self.total_rows(), self.p() + self.m() * self.q());
        r
    }
}

impl Validate for ThreeLevelProblem {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.symmetric(Location::Global, "A11", self.a11());
        r.finite_vec(Location::Global, "a1", self.rhs1());
        for (i, g) in self.groups().iter().enumerate() {
            if g.cells.is_empty() {
                r.violations.push(Violation { location: Location::Group(i), kind: ViolationKind::EmptyGroup, discrepancy: 1.0 });
            }
            r.finite(Location::Group(i), "A12", &g.a12);
            r.symmetric(Location::Group(i), "A22", &g.a22);
            r.finite_vec(Location::Group(i), "a2", &g.rhs2);
            for (j, c) in g.cells.iter().enumerate() {
                let at = Location::Cell(i, j);
                r.finite(at, "A12", &c.a12);
                r.finite(at, "A12 group coupling", &c.a12_group);
                r.symmetric(at, "A22", &c.a22);
                r.finite_vec(at, "a2", &c.rhs2);
            }
        }
        r
    }
}

impl Validate for ThreeLevelLsqProblem {
    fn validate(&self) -> ValidationReport {
        let ThreeLevelDims { p, q1, q2 } = self.dims();
        let mut r = ValidationReport::default();
        for (i, cells) in self.groups().iter().enumerate() {
            if cells.is_empty() {
                r.violations.push(Violation { location: Location::Group(i), kind: ViolationKind::EmptyGroup, discrepancy: 1.0 });
            }
            for (j, c) in cells.iter().enumerate() {
                let at = Location::Cell(i, j);
                r.finite(at, "B", &c.b);
                r.finite(at, "Bdot", &c.bdot);
                r.finite(at, "Bddot", &c.bddot);
                r.finite_vec(at, "b", &c.b_vec);
                r.rows_at_least(at, "Bddot", c.rows(), q2);
            }
            let group_rows: usize = cells.iter().map(|c| c.rows()).sum();
            r.rows_at_least(Location::Group(i), "[Bdot | Bddot]", group_rows, q1 + q2 * cells.len());
        }
        let cells: usize = self.cell_counts().iter().sum();
        r.rows_at_least(Location::Global, "B", self.total_rows(), p + self.m() * q1 + q2 * cells);
        r
    }
}

impl Validate for Problem {
    fn validate(&self) -> ValidationReport {
        match self {
            Problem::TwoLevel(p) => p.validate(),
            Problem::TwoLevelLsq(p) => p.validate(),
            Problem::ThreeLevel(p) => p.validate(),
            Problem::ThreeLevelLsq(p) => p.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{TwoLevelGroup, TwoLevelLsqGroup};

    fn identity_problem() -> TwoLevelProblem {
        TwoLevelProblem::new(
            DenseBlock::identity(1),
            vec![0.0],
            vec![TwoLevelGroup { a12: DenseBlock::zeros(1, 1), a22: DenseBlock::identity(1), rhs2: vec![0.0] }],
        )
        .unwrap()
    }

    #[test]
    fn identity_problem_is_valid() {
        assert!(identity_problem().validate().is_valid());
    }

    #[test]
    fn asymmetric_group_block_is_located() {
        let group = TwoLevelGroup {
            a12: DenseBlock::zeros(1, 2),
            a22: DenseBlock::from_rows(&[[1.0, 2.0], [3.0, 1.0]]).unwrap(),
            rhs2: vec![0.0; 2],
        };
        let p = TwoLevelProblem::new(DenseBlock::identity(1), vec![0.0], vec![group]).unwrap();
        let report = p.validate();
        assert_eq!(
            report.violations,
            vec![Violation {
                location: Location::Group(0),
                kind: ViolationKind::Asymmetric { block: "A22" },
                discrepancy: 1.0
            }]
        );
        assert!(report.to_string().contains("level-2 block 0"));
    }

    #[test]
    fn symmetry_tolerance_is_relative() {
        let big = DenseBlock::from_rows(&[[1e6, 1e6], [1e6 + 1e-5, 1e6]]).unwrap();
        let group = TwoLevelGroup { a12: DenseBlock::zeros(1, 2), a22: big, rhs2: vec![0.0; 2] };
        let p = TwoLevelProblem::new(DenseBlock::identity(1), vec![0.0], vec![group]).unwrap();
        assert!(p.validate().is_valid());
    }

    #[test]
    fn lsq_row_shortfall() {
        let g = TwoLevelLsqGroup { b: DenseBlock::zeros(1, 1), bdot: DenseBlock::zeros(1, 2), b_vec: vec![0.0] };
        let p = TwoLevelLsqProblem::new(vec![g]).unwrap();
        let report = p.validate();
        assert_eq!(report.violations.len(), 2);
        assert_eq!(report.violations[1].location, Location::Global);
        assert_eq!(report.violations[1].discrepancy, 2.0);
    }
}
