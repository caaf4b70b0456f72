//! Plain-text file format for problems, solutions, generator specs and benchmark configs.
//!
//! Every file starts with `MLSPARSE v1` and a `kind <name>` line. Problems and solutions follow
//! with a dimension header and then their blocks in layout order (global, then each group
//! followed by its cells). A matrix is written as `block <name> <rows> <cols>` followed by one
//! line per row; a vector as `vector <name> <len>` followed by a single line. Floats use 17
//! significant digits, which reparses to the same bits. Spec and config files are `key values...`
//! lines in any order. Blank lines and lines starting with `#` are ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::bench::{Arm, BenchConfig};
use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::generate::{Form, GenSpec, Levels, GENERATOR_NAME};
use crate::problem::{
    Problem, ThreeLevelCell, ThreeLevelDims, ThreeLevelGroup, ThreeLevelLsqCell, ThreeLevelLsqProblem,
    ThreeLevelProblem, TwoLevelGroup, TwoLevelLsqGroup, TwoLevelLsqProblem, TwoLevelProblem,
};
use crate::solution::{
    Solution, ThreeLevelCellSolution, ThreeLevelGroupSolution, ThreeLevelSolution, TwoLevelGroupSolution,
    TwoLevelSolution,
};

pub const MAGIC: &str = "MLSPARSE v1";

/// Kind names as they appear on the `kind` line.
pub mod kind {
    pub const TWO_LEVEL_PROBLEM: &str = "two-level-problem";
    pub const TWO_LEVEL_LSQ: &str = "two-level-lsq";
    pub const THREE_LEVEL_PROBLEM: &str = "three-level-problem";
    pub const THREE_LEVEL_LSQ: &str = "three-level-lsq";
    pub const TWO_LEVEL_SOLUTION: &str = "two-level-solution";
    pub const THREE_LEVEL_SOLUTION: &str = "three-level-solution";
    pub const GEN_SPEC: &str = "gen-spec";
    pub const BENCH_CONFIG: &str = "bench-config";
}

pub fn problem_kind(problem: &Problem) -> &'static str {
    match problem {
        Problem::TwoLevel(_) => kind::TWO_LEVEL_PROBLEM,
        Problem::TwoLevelLsq(_) => kind::TWO_LEVEL_LSQ,
        Problem::ThreeLevel(_) => kind::THREE_LEVEL_PROBLEM,
        Problem::ThreeLevelLsq(_) => kind::THREE_LEVEL_LSQ,
    }
}

/// A solution together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub method: Arm,
    /// Kind name of the problem that was solved.
    pub source: String,
    pub solution: Solution,
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Writer {
    out: String,
}

impl Writer {
    fn new(kind: &str) -> Self {
        Self { out: format!("{MAGIC}\nkind {kind}\n") }
    }

    fn line(&mut self, key: &str, values: &[String]) {
        self.out.push_str(key);
        for v in values {
            self.out.push(' ');
            self.out.push_str(v);
        }
        self.out.push('\n');
    }

    fn floats(&mut self, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|&x| format_f64(x)).collect();
        self.out.push_str(&joined.join(" "));
        self.out.push('\n');
    }

    fn block(&mut self, name: &str, b: &DenseBlock) {
        let _ = writeln!(self.out, "block {name} {} {}", b.rows(), b.cols());
        for r in 0..b.rows() {
            self.floats(b.row(r));
        }
    }

    fn vector(&mut self, name: &str, v: &[f64]) {
        let _ = writeln!(self.out, "vector {name} {}", v.len());
        self.floats(v);
    }
}

fn usizes<'a>(values: impl IntoIterator<Item = &'a usize>) -> Vec<String> {
    values.into_iter().map(|v| v.to_string()).collect()
}

fn dims_pairs(pairs: &[(&str, usize)]) -> Vec<String> {
    pairs.iter().flat_map(|(k, v)| [k.to_string(), v.to_string()]).collect()
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: FromStr>(line: usize, token: &str) -> Result<T> {
    token.parse().map_err(|_| parse_err(line, format!("cannot parse number {token:?}")))
}

impl<'a> Reader<'a> {
    /// Checks the magic line and returns the reader positioned after the `kind` line.
    fn open(text: &'a str) -> Result<(Self, &'a str)> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut reader = Self { lines, pos: 0 };
        let (n, first) = reader.next()?;
        if first != MAGIC {
            return Err(parse_err(n, format!("expected header {MAGIC:?}")));
        }
        let kind = reader.key("kind")?;
        if kind.len() != 1 {
            return Err(parse_err(n + 1, "kind line takes one value"));
        }
        Ok((reader, kind[0]))
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).or(self.lines.last()).map_or(1, |l| l.0)
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied().ok_or_else(|| parse_err(self.line_no(), "unexpected end of file"))?;
        self.pos += 1;
        Ok(item)
    }

    fn key(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (n, line) = self.next()?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some(key) {
            return Err(parse_err(n, format!("expected {key:?}")));
        }
        Ok(tokens.collect())
    }

    /// `dims name value name value ...` with names in the given order.
    fn dims(&mut self, names: &[&str]) -> Result<Vec<usize>> {
        let n = self.line_no();
        let tokens = self.key("dims")?;
        if tokens.len() != 2 * names.len() || tokens.iter().step_by(2).zip(names).any(|(t, k)| t != k) {
            return Err(parse_err(n, format!("dims line must list {names:?}")));
        }
        tokens.iter().skip(1).step_by(2).map(|t| parse_num(n, t)).collect()
    }

    fn counts(&mut self, key: &str, expected: usize) -> Result<Vec<usize>> {
        let n = self.line_no();
        let values: Vec<usize> = self.key(key)?.iter().map(|t| parse_num(n, t)).collect::<Result<_>>()?;
        if values.len() != expected {
            return Err(parse_err(n, format!("{key} needs {expected} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let (n, line) = self.next()?;
        let values: Vec<f64> = line.split_whitespace().map(|t| parse_num(n, t)).collect::<Result<_>>()?;
        if values.len() != count {
            return Err(parse_err(n, format!("expected {count} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn header(&mut self, tag: &str, name: &str) -> Result<(usize, Vec<usize>)> {
        let n = self.line_no();
        let tokens = self.key(tag)?;
        if tokens.first() != Some(&name) {
            return Err(parse_err(n, format!("expected {tag} {name}")));
        }
        let sizes = tokens[1..].iter().map(|t| parse_num(n, t)).collect::<Result<Vec<usize>>>()?;
        Ok((n, sizes))
    }

    fn block(&mut self, name: &str, shape: Option<(usize, usize)>) -> Result<DenseBlock> {
        let (n, sizes) = self.header("block", name)?;
        let &[rows, cols] = sizes.as_slice() else {
            return Err(parse_err(n, format!("block {name} needs rows and cols")));
        };
        if shape.is_some_and(|s| s != (rows, cols)) {
            return Err(parse_err(n, format!("block {name} is {rows}x{cols}, expected {:?}", shape.unwrap())));
        }
        if rows == 0 || cols == 0 {
            return Err(parse_err(n, format!("block {name} is empty")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.floats(cols)?);
        }
        DenseBlock::from_vec(rows, cols, data).map_err(|e| parse_err(n, e.to_string()))
    }

    fn vector(&mut self, name: &str, len: Option<usize>) -> Result<Vec<f64>> {
        let (n, sizes) = self.header("vector", name)?;
        let &[found] = sizes.as_slice() else {
            return Err(parse_err(n, format!("vector {name} needs a length")));
        };
        if len.is_some_and(|l| l != found) || found == 0 {
            return Err(parse_err(n, format!("vector {name} has length {found}, expected {len:?}")));
        }
        self.floats(found)
    }

    fn scalar(&mut self, name: &str) -> Result<f64> {
        let n = self.line_no();
        let tokens = self.key("scalar")?;
        match tokens.as_slice() {
            [k, v] if *k == name => parse_num(n, v),
            _ => Err(parse_err(n, format!("expected scalar {name}"))),
        }
    }

    fn meta(&mut self, name: &str) -> Result<&'a str> {
        let n = self.line_no();
        match self.key("meta")?.as_slice() {
            [k, v] if *k == name => Ok(v),
            _ => Err(parse_err(n, format!("expected meta {name}"))),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            Some((n, _)) => Err(parse_err(*n, "trailing content")),
            None => Ok(()),
        }
    }

    /// Remaining lines as `key -> (line, values)`, rejecting duplicates and unknown keys.
    fn key_values(&mut self, allowed: &[&str]) -> Result<BTreeMap<&'a str, (usize, Vec<&'a str>)>> {
        let mut map = BTreeMap::new();
        while self.pos < self.lines.len() {
            let (n, line) = self.next()?;
            let mut tokens = line.split_whitespace();
            let key = tokens.next().unwrap_or_default();
            if !allowed.contains(&key) {
                return Err(parse_err(n, format!("unknown key {key:?}")));
            }
            if map.insert(key, (n, tokens.collect())).is_some() {
                return Err(parse_err(n, format!("duplicate key {key:?}")));
            }
        }
        Ok(map)
    }
}

fn build<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| parse_err(line, e.to_string()))
}

pub fn write_problem(problem: &Problem) -> String {
    let mut w = Writer::new(problem_kind(problem));
    match problem {
        Problem::TwoLevel(pr) => {
            w.line("dims", &dims_pairs(&[("p", pr.p()), ("q", pr.q()), ("m", pr.m())]));
            w.block("A11", pr.a11());
            w.vector("a1", pr.rhs1());
            for (i, g) in pr.groups().iter().enumerate() {
                w.block(&format!("A12[{i}]"), &g.a12);
                w.block(&format!("A22[{i}]"), &g.a22);
                w.vector(&format!("a2[{i}]"), &g.rhs2);
            }
        }
        Problem::TwoLevelLsq(pr) => {
            w.line("dims", &dims_pairs(&[("p", pr.p()), ("q", pr.q()), ("m", pr.m())]));
            w.line("rows", &usizes(&pr.groups().iter().map(|g| g.rows()).collect::<Vec<_>>()));
            for (i, g) in pr.groups().iter().enumerate() {
                w.block(&format!("B[{i}]"), &g.b);
                w.block(&format!("Bdot[{i}]"), &g.bdot);
                w.vector(&format!("b[{i}]"), &g.b_vec);
            }
        }
        Problem::ThreeLevel(pr) => {
            let d = pr.dims();
            w.line("dims", &dims_pairs(&[("p", d.p), ("q1", d.q1), ("q2", d.q2), ("m", pr.m())]));
            w.line("cells", &usizes(&pr.cell_counts()));
            w.block("A11", pr.a11());
            w.vector("a1", pr.rhs1());
            for (i, g) in pr.groups().iter().enumerate() {
                w.block(&format!("A12[{i}]"), &g.a12);
                w.block(&format!("A22[{i}]"), &g.a22);
                w.vector(&format!("a2[{i}]"), &g.rhs2);
                for (j, c) in g.cells.iter().enumerate() {
                    w.block(&format!("A12[{i},{j}]"), &c.a12);
                    w.block(&format!("A12_group[{i},{j}]"), &c.a12_group);
                    w.block(&format!("A22[{i},{j}]"), &c.a22);
                    w.vector(&format!("a2[{i},{j}]"), &c.rhs2);
                }
            }
        }
        Problem::ThreeLevelLsq(pr) => {
            let d = pr.dims();
            w.line("dims", &dims_pairs(&[("p", d.p), ("q1", d.q1), ("q2", d.q2), ("m", pr.m())]));
            w.line("cells", &usizes(&pr.cell_counts()));
            for (i, cells) in pr.groups().iter().enumerate() {
                w.line(&format!("rows[{i}]"), &usizes(&cells.iter().map(|c| c.rows()).collect::<Vec<_>>()));
            }
            for (i, cells) in pr.groups().iter().enumerate() {
                for (j, c) in cells.iter().enumerate() {
                    w.block(&format!("B[{i},{j}]"), &c.b);
                    w.block(&format!("Bdot[{i},{j}]"), &c.bdot);
                    w.block(&format!("Bddot[{i},{j}]"), &c.bddot);
                    w.vector(&format!("b[{i},{j}]"), &c.b_vec);
                }
            }
        }
    }
    w.out
}

pub fn read_problem(text: &str) -> Result<Problem> {
    let (mut r, kind) = Reader::open(text)?;
    let start = r.line_no();
    let problem = match kind {
        kind::TWO_LEVEL_PROBLEM => {
            let d = r.dims(&["p", "q", "m"])?;
            let (p, q, m) = (d[0], d[1], d[2]);
            let a11 = r.block("A11", Some((p, p)))?;
            let rhs1 = r.vector("a1", Some(p))?;
            let groups = (0..m)
                .map(|i| {
                    Ok(TwoLevelGroup {
                        a12: r.block(&format!("A12[{i}]"), Some((p, q)))?,
                        a22: r.block(&format!("A22[{i}]"), Some((q, q)))?,
                        rhs2: r.vector(&format!("a2[{i}]"), Some(q))?,
                    })
                })
                .collect::<Result<_>>()?;
            Problem::TwoLevel(build(start, TwoLevelProblem::new(a11, rhs1, groups))?)
        }
        kind::TWO_LEVEL_LSQ => {
            let d = r.dims(&["p", "q", "m"])?;
            let (p, q, m) = (d[0], d[1], d[2]);
            let rows = r.counts("rows", m)?;
            let groups = rows
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    Ok(TwoLevelLsqGroup {
                        b: r.block(&format!("B[{i}]"), Some((n, p)))?,
                        bdot: r.block(&format!("Bdot[{i}]"), Some((n, q)))?,
                        b_vec: r.vector(&format!("b[{i}]"), Some(n))?,
                    })
                })
                .collect::<Result<_>>()?;
            Problem::TwoLevelLsq(build(start, TwoLevelLsqProblem::new(groups))?)
        }
        kind::THREE_LEVEL_PROBLEM => {
            let d = r.dims(&["p", "q1", "q2", "m"])?;
            let dims = ThreeLevelDims { p: d[0], q1: d[1], q2: d[2] };
            let counts = r.counts("cells", d[3])?;
            let (p, q1, q2) = (dims.p, dims.q1, dims.q2);
            let a11 = r.block("A11", Some((p, p)))?;
            let rhs1 = r.vector("a1", Some(p))?;
            let groups = counts
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let a12 = r.block(&format!("A12[{i}]"), Some((p, q1)))?;
                    let a22 = r.block(&format!("A22[{i}]"), Some((q1, q1)))?;
                    let rhs2 = r.vector(&format!("a2[{i}]"), Some(q1))?;
                    let cells = (0..n)
                        .map(|j| {
                            Ok(ThreeLevelCell {
                                a12: r.block(&format!("A12[{i},{j}]"), Some((p, q2)))?,
                                a12_group: r.block(&format!("A12_group[{i},{j}]"), Some((q1, q2)))?,
                                a22: r.block(&format!("A22[{i},{j}]"), Some((q2, q2)))?,
                                rhs2: r.vector(&format!("a2[{i},{j}]"), Some(q2))?,
                            })
                        })
                        .collect::<Result<_>>()?;
                    Ok(ThreeLevelGroup { a12, a22, rhs2, cells })
                })
                .collect::<Result<_>>()?;
            Problem::ThreeLevel(build(start, ThreeLevelProblem::new(dims, a11, rhs1, groups))?)
        }
        kind::THREE_LEVEL_LSQ => {
            let d = r.dims(&["p", "q1", "q2", "m"])?;
            let dims = ThreeLevelDims { p: d[0], q1: d[1], q2: d[2] };
            let counts = r.counts("cells", d[3])?;
            let rows: Vec<Vec<usize>> =
                counts.iter().enumerate().map(|(i, &n)| r.counts(&format!("rows[{i}]"), n)).collect::<Result<_>>()?;
            let groups = rows
                .iter()
                .enumerate()
                .map(|(i, cells)| {
                    cells
                        .iter()
                        .enumerate()
                        .map(|(j, &o)| {
                            Ok(ThreeLevelLsqCell {
                                b: r.block(&format!("B[{i},{j}]"), Some((o, dims.p)))?,
                                bdot: r.block(&format!("Bdot[{i},{j}]"), Some((o, dims.q1)))?,
                                bddot: r.block(&format!("Bddot[{i},{j}]"), Some((o, dims.q2)))?,
                                b_vec: r.vector(&format!("b[{i},{j}]"), Some(o))?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            Problem::ThreeLevelLsq(build(start, ThreeLevelLsqProblem::new(dims, groups))?)
        }
        other => return Err(parse_err(start.saturating_sub(1).max(1), format!("not a problem file: kind {other}"))),
    };
    r.finish()?;
    Ok(problem)
}

pub fn write_solution(file: &SolutionFile) -> String {
    let kind = match file.solution {
        Solution::TwoLevel(_) => kind::TWO_LEVEL_SOLUTION,
        Solution::ThreeLevel(_) => kind::THREE_LEVEL_SOLUTION,
    };
    let mut w = Writer::new(kind);
    w.line("meta", &["method".into(), file.method.as_str().into()]);
    w.line("meta", &["source".into(), file.source.clone()]);
    match &file.solution {
        Solution::TwoLevel(s) => {
            let q = s.groups[0].x2.len();
            w.line("dims", &dims_pairs(&[("p", s.x1.len()), ("q", q), ("m", s.groups.len())]));
            w.line("scalar", &["log_abs_det".into(), format_f64(s.log_abs_det)]);
            w.vector("x1", &s.x1);
            w.block("Ainv11", &s.ainv11);
            for (i, g) in s.groups.iter().enumerate() {
                w.vector(&format!("x2[{i}]"), &g.x2);
                w.block(&format!("Ainv12[{i}]"), &g.ainv12);
                w.block(&format!("Ainv22[{i}]"), &g.ainv22);
            }
        }
        Solution::ThreeLevel(s) => {
            let q1 = s.groups[0].x2.len();
            let q2 = s.groups.iter().flat_map(|g| g.cells.first()).next().map_or(0, |c| c.x2.len());
            w.line("dims", &dims_pairs(&[("p", s.x1.len()), ("q1", q1), ("q2", q2), ("m", s.groups.len())]));
            w.line("cells", &usizes(&s.groups.iter().map(|g| g.cells.len()).collect::<Vec<_>>()));
            w.line("scalar", &["log_abs_det".into(), format_f64(s.log_abs_det)]);
            w.vector("x1", &s.x1);
            w.block("Ainv11", &s.ainv11);
            for (i, g) in s.groups.iter().enumerate() {
                w.vector(&format!("x2[{i}]"), &g.x2);
                w.block(&format!("Ainv12[{i}]"), &g.ainv12);
                w.block(&format!("Ainv22[{i}]"), &g.ainv22);
                for (j, c) in g.cells.iter().enumerate() {
                    w.vector(&format!("x2[{i},{j}]"), &c.x2);
                    w.block(&format!("Ainv12[{i},{j}]"), &c.ainv12);
                    w.block(&format!("Ainv12_group[{i},{j}]"), &c.ainv12_group);
                    w.block(&format!("Ainv22[{i},{j}]"), &c.ainv22);
                }
            }
        }
    }
    w.out
}

pub fn read_solution(text: &str) -> Result<SolutionFile> {
    let (mut r, kind) = Reader::open(text)?;
    let n = r.line_no();
    let method = r.meta("method")?.parse().map_err(|e: Error| parse_err(n, e.to_string()))?;
    let source = r.meta("source")?.to_string();
    let solution = match kind {
        kind::TWO_LEVEL_SOLUTION => {
            let d = r.dims(&["p", "q", "m"])?;
            let (p, q, m) = (d[0], d[1], d[2]);
            let log_abs_det = r.scalar("log_abs_det")?;
            let x1 = r.vector("x1", Some(p))?;
            let ainv11 = r.block("Ainv11", Some((p, p)))?;
            let groups = (0..m)
                .map(|i| {
                    Ok(TwoLevelGroupSolution {
                        x2: r.vector(&format!("x2[{i}]"), Some(q))?,
                        ainv12: r.block(&format!("Ainv12[{i}]"), Some((p, q)))?,
                        ainv22: r.block(&format!("Ainv22[{i}]"), Some((q, q)))?,
                    })
                })
                .collect::<Result<_>>()?;
            Solution::TwoLevel(TwoLevelSolution { x1, ainv11, groups, log_abs_det })
        }
        kind::THREE_LEVEL_SOLUTION => {
            let d = r.dims(&["p", "q1", "q2", "m"])?;
            let (p, q1, q2) = (d[0], d[1], d[2]);
            let counts = r.counts("cells", d[3])?;
            let log_abs_det = r.scalar("log_abs_det")?;
            let x1 = r.vector("x1", Some(p))?;
            let ainv11 = r.block("Ainv11", Some((p, p)))?;
            let groups = counts
                .iter()
                .enumerate()
                .map(|(i, &cells)| {
                    let x2 = r.vector(&format!("x2[{i}]"), Some(q1))?;
                    let ainv12 = r.block(&format!("Ainv12[{i}]"), Some((p, q1)))?;
                    let ainv22 = r.block(&format!("Ainv22[{i}]"), Some((q1, q1)))?;
                    let cells = (0..cells)
                        .map(|j| {
                            Ok(ThreeLevelCellSolution {
                                x2: r.vector(&format!("x2[{i},{j}]"), Some(q2))?,
                                ainv12: r.block(&format!("Ainv12[{i},{j}]"), Some((p, q2)))?,
                                ainv12_group: r.block(&format!("Ainv12_group[{i},{j}]"), Some((q1, q2)))?,
                                ainv22: r.block(&format!("Ainv22[{i},{j}]"), Some((q2, q2)))?,
                            })
                        })
                        .collect::<Result<_>>()?;
                    Ok(ThreeLevelGroupSolution { x2, ainv12, ainv22, cells })
                })
                .collect::<Result<_>>()?;
            Solution::ThreeLevel(ThreeLevelSolution { x1, ainv11, groups, log_abs_det })
        }
        other => return Err(parse_err(1, format!("not a solution file: kind {other}"))),
    };
    r.finish()?;
    Ok(SolutionFile { method, source, solution })
}

fn form_name(form: Form) -> &'static str {
    match form {
        Form::LeastSquares => "lsq",
        Form::General => "general",
    }
}

fn write_spec_keys(w: &mut Writer, spec: &GenSpec, with_m: bool) {
    w.line("levels", &[spec.levels.count().to_string()]);
    if with_m {
        w.line("m", &[spec.m.to_string()]);
    }
    w.line("p", &[spec.p.to_string()]);
    match spec.levels {
        Levels::Two => w.line("q", &[spec.q1.to_string()]),
        Levels::Three => {
            w.line("q1", &[spec.q1.to_string()]);
            w.line("q2", &[spec.q2.to_string()]);
            w.line("inner", &usizes(&[spec.inner.0, spec.inner.1]));
        }
    }
    w.line("rows", &usizes(&[spec.rows.0, spec.rows.1]));
    w.line("seed", &[spec.seed.to_string()]);
    w.line("ridge", &[format_f64(spec.ridge)]);
}

pub fn write_gen_spec(spec: &GenSpec) -> String {
    let mut w = Writer::new(kind::GEN_SPEC);
    write_spec_keys(&mut w, spec, true);
    w.line("form", &[form_name(spec.form).into()]);
    w.line("generator", &[GENERATOR_NAME.into()]);
    w.out
}

type KeyMap<'a> = BTreeMap<&'a str, (usize, Vec<&'a str>)>;

fn single<'a>(map: &KeyMap<'a>, key: &str) -> Result<Option<(usize, &'a str)>> {
    match map.get(key) {
        None => Ok(None),
        Some((n, v)) if v.len() == 1 => Ok(Some((*n, v[0]))),
        Some((n, _)) => Err(parse_err(*n, format!("{key} takes one value"))),
    }
}

fn required_num<T: FromStr>(map: &KeyMap, key: &str, fallback_line: usize) -> Result<T> {
    match single(map, key)? {
        Some((n, v)) => parse_num(n, v),
        None => Err(parse_err(fallback_line, format!("missing key {key:?}"))),
    }
}

fn optional_num<T: FromStr>(map: &KeyMap, key: &str, default: T) -> Result<T> {
    single(map, key)?.map_or(Ok(default), |(n, v)| parse_num(n, v))
}

fn range(map: &KeyMap, key: &str, fallback_line: usize) -> Result<(usize, usize)> {
    match map.get(key) {
        Some((n, v)) if v.len() == 2 => Ok((parse_num(*n, v[0])?, parse_num(*n, v[1])?)),
        Some((n, _)) => Err(parse_err(*n, format!("{key} takes two values"))),
        None => Err(parse_err(fallback_line, format!("missing key {key:?}"))),
    }
}

const SPEC_KEYS: &[&str] = &["levels", "m", "p", "q", "q1", "q2", "inner", "rows", "seed", "ridge", "form", "generator"];

fn spec_from_keys(map: &KeyMap, last: usize, m: usize) -> Result<GenSpec> {
    let levels: u8 = required_num(map, "levels", last)?;
    let p = required_num(map, "p", last)?;
    let rows = range(map, "rows", last)?;
    let seed = required_num(map, "seed", last)?;
    let mut spec = match levels {
        2 => GenSpec::two_level(m, p, required_num(map, "q", last)?, rows, seed),
        3 => GenSpec::three_level(
            m,
            p,
            required_num(map, "q1", last)?,
            required_num(map, "q2", last)?,
            range(map, "inner", last)?,
            rows,
            seed,
        ),
        other => return Err(parse_err(map["levels"].0, format!("levels must be 2 or 3, got {other}"))),
    };
    spec.ridge = optional_num(map, "ridge", spec.ridge)?;
    if let Some((n, form)) = single(map, "form")? {
        spec.form = match form {
            "lsq" => Form::LeastSquares,
            "general" => Form::General,
            other => return Err(parse_err(n, format!("form must be lsq or general, got {other:?}"))),
        };
    }
    if let Some((n, g)) = single(map, "generator")? {
        if g != GENERATOR_NAME {
            return Err(parse_err(n, format!("unsupported generator {g:?}")));
        }
    }
    Ok(spec)
}

/// Parses a generator spec. Range checks are left to [`GenSpec::validate`].
pub fn read_gen_spec(text: &str) -> Result<GenSpec> {
    let (mut r, kind) = Reader::open(text)?;
    if kind != kind::GEN_SPEC {
        return Err(parse_err(1, format!("not a spec file: kind {kind}")));
    }
    let last = r.line_no();
    let map = r.key_values(SPEC_KEYS)?;
    let m = required_num(&map, "m", last)?;
    spec_from_keys(&map, last, m)
}

pub fn write_bench_config(config: &BenchConfig) -> String {
    let mut w = Writer::new(kind::BENCH_CONFIG);
    write_spec_keys(&mut w, &config.spec, false);
    w.line("form", &[form_name(config.spec.form).into()]);
    w.line("ladder", &usizes(&config.ladder));
    w.line("replications", &[config.replications.to_string()]);
    w.line("arms", &config.arms.iter().map(|a| a.as_str().to_string()).collect::<Vec<_>>());
    w.line("ceiling", &[config.ceiling.to_string()]);
    w.line("check", &[config.check.to_string()]);
    w.line("parallel", &[config.parallel.to_string()]);
    w.line("generator", &[GENERATOR_NAME.into()]);
    w.out
}

/// Parses a benchmark config. `ceiling` defaults to `default_ceiling`; `check` and `parallel`
/// default to false.
pub fn read_bench_config(text: &str, default_ceiling: usize) -> Result<BenchConfig> {
    let (mut r, kind) = Reader::open(text)?;
    if kind != kind::BENCH_CONFIG {
        return Err(parse_err(1, format!("not a bench config: kind {kind}")));
    }
    let last = r.line_no();
    let mut keys = SPEC_KEYS.to_vec();
    keys.retain(|k| *k != "m");
    keys.extend(["ladder", "replications", "arms", "ceiling", "check", "parallel"]);
    let map = r.key_values(&keys)?;
    let spec = spec_from_keys(&map, last, 1)?;
    let ladder = match map.get("ladder") {
        Some((n, v)) => v.iter().map(|t| parse_num(*n, t)).collect::<Result<Vec<usize>>>()?,
        None => return Err(parse_err(last, "missing key \"ladder\"")),
    };
    let arms = match map.get("arms") {
        Some((n, v)) => v.iter().map(|t| t.parse().map_err(|e: Error| parse_err(*n, e.to_string()))).collect::<Result<_>>()?,
        None => vec![Arm::Streamlined, Arm::Naive],
    };
    Ok(BenchConfig {
        spec,
        ladder,
        replications: required_num(&map, "replications", last)?,
        arms,
        ceiling: optional_num(&map, "ceiling", default_ceiling)?,
        check: optional_num(&map, "check", false)?,
        parallel: optional_num(&map, "parallel", false)?,
    })
}

pub fn save(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    read_problem(&std::fs::read_to_string(path)?)
}

pub fn load_solution(path: &Path) -> Result<SolutionFile> {
    read_solution(&std::fs::read_to_string(path)?)
}
