//! Solver outputs: solution sub-vectors, the inverse sub-blocks in the positions of the non-zero
//! blocks of `A`, and `log|A|`.

use crate::block::DenseBlock;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelGroupSolution {
    /// `x2,i`, length `q`.
    pub x2: Vec<f64>,
    /// `A^{12,i}`, `p x q`.
    pub ainv12: DenseBlock,
    /// `A^{22,i}`, `q x q`.
    pub ainv22: DenseBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSolution {
    pub x1: Vec<f64>,
    /// `A^{11}`, `p x p`.
    pub ainv11: DenseBlock,
    pub groups: Vec<TwoLevelGroupSolution>,
    /// `log|det A|`. The sign of the determinant is not tracked.
    pub log_abs_det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelCellSolution {
    /// `x2,ij`, length `q2`.
    pub x2: Vec<f64>,
    /// `A^{12,ij}`, `p x q2`.
    pub ainv12: DenseBlock,
    /// `A^{12,i,j}`, `q1 x q2`.
    pub ainv12_group: DenseBlock,
    /// `A^{22,ij}`, `q2 x q2`.
    pub ainv22: DenseBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelGroupSolution {
    /// `x2,i`, length `q1`.
    pub x2: Vec<f64>,
    /// `A^{12,i}`, `p x q1`.
    pub ainv12: DenseBlock,
    /// `A^{22,i}`, `q1 x q1`.
    pub ainv22: DenseBlock,
    pub cells: Vec<ThreeLevelCellSolution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelSolution {
    pub x1: Vec<f64>,
    pub ainv11: DenseBlock,
    pub groups: Vec<ThreeLevelGroupSolution>,
    pub log_abs_det: f64,
}

/// Either solution form, as read from or written to a solution file.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    TwoLevel(TwoLevelSolution),
    ThreeLevel(ThreeLevelSolution),
}

impl Solution {
    pub fn log_abs_det(&self) -> f64 {
        match self {
            Solution::TwoLevel(s) => s.log_abs_det,
            Solution::ThreeLevel(s) => s.log_abs_det,
        }
    }
}

/// Largest field-wise discrepancy between two solutions, each field measured relative to the
/// largest magnitude of that field in `reference`.
///
/// A field agrees at tolerance `rel` with absolute floor `abs` when
/// `max|got - ref| <= rel * max|ref| + abs`. [`Agreement::worst_excess`] reports the worst field.
#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub fields: Vec<FieldAgreement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldAgreement {
    pub name: String,
    pub max_abs_diff: f64,
    pub reference_scale: f64,
}

impl FieldAgreement {
    /// `max|Δ| / max(scale, floor)`.
    pub fn relative(&self, floor: f64) -> f64 {
        self.max_abs_diff / self.reference_scale.max(floor)
    }

    pub fn within(&self, rel: f64, abs: f64) -> bool {
        self.max_abs_diff <= rel * self.reference_scale + abs
    }
}

impl Agreement {
    pub fn within(&self, rel: f64, abs: f64) -> bool {
        self.fields.iter().all(|f| f.within(rel, abs))
    }

    /// Fields that fail the tolerance.
    pub fn failures(&self, rel: f64, abs: f64) -> Vec<&FieldAgreement> {
        self.fields.iter().filter(|f| !f.within(rel, abs)).collect()
    }

    /// Largest relative discrepancy across fields (scales floored at 1e-300).
    pub fn max_relative(&self) -> f64 {
        self.fields.iter().map(|f| f.relative(1e-300)).fold(0.0, f64::max)
    }

    pub fn worst_excess(&self, rel: f64, abs: f64) -> Option<&FieldAgreement> {
        self.fields
            .iter()
            .max_by(|a, b| {
                let ea = a.max_abs_diff - (rel * a.reference_scale + abs);
                let eb = b.max_abs_diff - (rel * b.reference_scale + abs);
                ea.total_cmp(&eb)
            })
    }
}

#[derive(Default)]
struct FieldCollector {
    fields: Vec<FieldAgreement>,
}

impl FieldCollector {
    fn vec(&mut self, name: &str, got: &[f64], reference: &[f64]) {
        assert_eq!(got.len(), reference.len(), "{name}: length mismatch");
        let diff = got.iter().zip(reference).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let diff = if got.iter().chain(reference).any(|v| v.is_nan()) { f64::INFINITY } else { diff };
        self.push(name, diff, crate::block::max_abs(reference));
    }

    fn block(&mut self, name: &str, got: &DenseBlock, reference: &DenseBlock) {
        self.vec(name, got.as_slice(), reference.as_slice());
    }

    fn scalar(&mut self, name: &str, got: f64, reference: f64) {
        let diff = if got.is_nan() || reference.is_nan() { f64::INFINITY } else { (got - reference).abs() };
        // log-determinants are compared relative to max(|ref|, 1)
        self.push(name, diff, reference.abs().max(1.0));
    }

    fn push(&mut self, name: &str, max_abs_diff: f64, reference_scale: f64) {
        match self.fields.iter_mut().find(|f| f.name == name) {
            Some(f) => {
                f.max_abs_diff = f.max_abs_diff.max(max_abs_diff);
                f.reference_scale = f.reference_scale.max(reference_scale);
            }
            None => self.fields.push(FieldAgreement { name: name.to_string(), max_abs_diff, reference_scale }),
        }
    }
}

impl TwoLevelSolution {
    /// Field-wise comparison against `reference`. Per-group fields are pooled across groups.
    pub fn compare(&self, reference: &TwoLevelSolution) -> Agreement {
        assert_eq!(self.groups.len(), reference.groups.len(), "group count mismatch");
        let mut c = FieldCollector::default();
        c.vec("x1", &self.x1, &reference.x1);
        c.block("ainv11", &self.ainv11, &reference.ainv11);
        for (g, r) in self.groups.iter().zip(&reference.groups) {
            c.vec("x2", &g.x2, &r.x2);
            c.block("ainv12", &g.ainv12, &r.ainv12);
            c.block("ainv22", &g.ainv22, &r.ainv22);
        }
        c.scalar("log_abs_det", self.log_abs_det, reference.log_abs_det);
        Agreement { fields: c.fields }
    }
}

impl ThreeLevelSolution {
    pub fn compare(&self, reference: &ThreeLevelSolution) -> Agreement {
        assert_eq!(self.groups.len(), reference.groups.len(), "group count mismatch");
        let mut c = FieldCollector::default();
        c.vec("x1", &self.x1, &reference.x1);
        c.block("ainv11", &self.ainv11, &reference.ainv11);
        for (g, r) in self.groups.iter().zip(&reference.groups) {
            c.vec("x2_group", &g.x2, &r.x2);
            c.block("ainv12_group", &g.ainv12, &r.ainv12);
            c.block("ainv22_group", &g.ainv22, &r.ainv22);
            assert_eq!(g.cells.len(), r.cells.len(), "cell count mismatch");
            for (gc, rc) in g.cells.iter().zip(&r.cells) {
                c.vec("x2_cell", &gc.x2, &rc.x2);
                c.block("ainv12_cell", &gc.ainv12, &rc.ainv12);
                c.block("ainv12_cell_group", &gc.ainv12_group, &rc.ainv12_group);
                c.block("ainv22_cell", &gc.ainv22, &rc.ainv22);
            }
        }
        c.scalar("log_abs_det", self.log_abs_det, reference.log_abs_det);
        Agreement { fields: c.fields }
    }
}

impl Solution {
    /// Compares two solutions of the same level; `None` when the levels or shapes differ.
    pub fn compare(&self, reference: &Solution) -> Option<Agreement> {
        match (self, reference) {
            (Solution::TwoLevel(a), Solution::TwoLevel(b)) if a.groups.len() == b.groups.len() => Some(a.compare(b)),
            (Solution::ThreeLevel(a), Solution::ThreeLevel(b))
                if a.groups.len() == b.groups.len()
                    && a.groups.iter().zip(&b.groups).all(|(x, y)| x.cells.len() == y.cells.len()) =>
            {
                Some(a.compare(b))
            }
            _ => None,
        }
    }
}
