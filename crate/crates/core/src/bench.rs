//! Timing harness comparing the streamlined solvers with the dense naive path over a ladder of
//! group counts.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::format_f64;
use crate::generate::{generate, GenSpec, Levels};
use crate::oracle::oracle_problem;
use crate::problem::Problem;
use crate::solution::Solution;
use crate::{solve, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Streamlined,
    Naive,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Streamlined => "streamlined",
            Arm::Naive => "naive",
        }
    }

    /// Runs this arm on `problem`. The naive arm refuses orders above `ceiling`.
    pub fn run(self, problem: &Problem, ceiling: usize) -> Result<Solution> {
        match self {
            Arm::Streamlined => solve(problem, SolveOptions::sequential()),
            Arm::Naive => oracle_problem(problem, ceiling),
        }
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "streamlined" => Ok(Arm::Streamlined),
            "naive" => Ok(Arm::Naive),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}, expected streamlined or naive"))),
        }
    }
}

/// Benchmark settings. `spec.m` is ignored; each ladder rung sets it. Replication `r` uses seed
/// `spec.seed + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub spec: GenSpec,
    pub ladder: Vec<usize>,
    pub replications: usize,
    pub arms: Vec<Arm>,
    /// Largest system order the naive arm is run at.
    pub ceiling: usize,
    /// Record each arm's largest relative deviation from the dense solution.
    pub check: bool,
    /// Run replications concurrently. Each solve stays single-threaded.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub levels: u8,
    pub m: usize,
    pub p: usize,
    pub q1: usize,
    /// Zero for two-level runs.
    pub q2: usize,
    pub replication: usize,
    pub arm: Arm,
    pub wall_time_seconds: f64,
    pub max_rel_error_vs_oracle: Option<f64>,
    pub seed: u64,
}

/// Wall-time statistics of one arm at one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub sd: f64,
    pub median: f64,
}

impl ArmSummary {
    pub fn from_times(times: &[f64]) -> Option<Self> {
        if times.is_empty() {
            return None;
        }
        let count = times.len();
        let mean = times.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = times.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if count % 2 == 1 { sorted[count / 2] } else { 0.5 * (sorted[count / 2 - 1] + sorted[count / 2]) };
        Some(Self { count, mean, sd, median })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub m: usize,
    pub naive: Option<ArmSummary>,
    pub streamlined: Option<ArmSummary>,
}

impl ReportRow {
    /// Naive over streamlined mean time, when both arms ran.
    pub fn mean_ratio(&self) -> Option<f64> {
        Some(self.naive.as_ref()?.mean / self.streamlined.as_ref()?.mean)
    }

    pub fn median_ratio(&self) -> Option<f64> {
        Some(self.naive.as_ref()?.median / self.streamlined.as_ref()?.median)
    }
}

/// Per-`m` summary in ascending `m`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
}

impl BenchmarkReport {
    pub fn from_records(records: &[BenchmarkRecord]) -> Self {
        let mut ms: Vec<usize> = records.iter().map(|r| r.m).collect();
        ms.sort_unstable();
        ms.dedup();
        let times = |m: usize, arm: Arm| -> Vec<f64> {
            let mut sel: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.m == m && r.arm == arm).collect();
            sel.sort_by_key(|r| r.replication);
            sel.iter().map(|r| r.wall_time_seconds).collect()
        };
        let rows = ms
            .into_iter()
            .map(|m| ReportRow {
                m,
                naive: ArmSummary::from_times(&times(m, Arm::Naive)),
                streamlined: ArmSummary::from_times(&times(m, Arm::Streamlined)),
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, m: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    /// Mean-time ratio `t(m2) / t(m1)` for one arm.
    pub fn growth(&self, arm: Arm, m1: usize, m2: usize) -> Option<f64> {
        let get = |m| {
            let row = self.row(m)?;
            match arm {
                Arm::Naive => row.naive.as_ref(),
                Arm::Streamlined => row.streamlined.as_ref(),
            }
            .map(|s| s.mean)
        };
        Some(get(m2)? / get(m1)?)
    }

    /// Table with columns m, naive, streamlined and the naive/streamlined ratios; times are
    /// `mean (sd)` in seconds, followed by medians.
    pub fn render(&self) -> String {
        let cell = |s: &Option<ArmSummary>| match s {
            Some(s) => format!("{:.4} ({:.4})", s.mean, s.sd),
            None => "-".to_string(),
        };
        let median = |s: &Option<ArmSummary>| s.as_ref().map_or("-".to_string(), |s| format!("{:.4}", s.median));
        let ratio = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.1}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>6}  {:>18}  {:>18}  {:>12}  {:>12}  {:>12}  {:>12}",
            "m", "naive", "streamlined", "ratio(mean)", "naive(med)", "stream(med)", "ratio(med)"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:>6}  {:>18}  {:>18}  {:>12}  {:>12}  {:>12}  {:>12}",
                row.m,
                cell(&row.naive),
                cell(&row.streamlined),
                ratio(row.mean_ratio()),
                median(&row.naive),
                median(&row.streamlined),
                ratio(row.median_ratio()),
            );
        }
        out
    }
}

/// Output of [`run_bench`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub records: Vec<BenchmarkRecord>,
    pub report: BenchmarkReport,
    /// Human-readable notes such as skipped naive runs.
    pub notices: Vec<String>,
}

fn timed(arm: Arm, problem: &Problem, ceiling: usize) -> Result<(Solution, f64)> {
    let start = Instant::now();
    let solution = arm.run(problem, ceiling)?;
    Ok((solution, start.elapsed().as_secs_f64()))
}

fn replicate(config: &BenchConfig, m: usize, rep: usize, arms: &[Arm]) -> Result<Vec<BenchmarkRecord>> {
    let seed = config.spec.seed.wrapping_add(rep as u64);
    let problem = generate(&config.spec.clone().with_m(m).with_seed(seed))?;
    let dense_ok = problem.order() <= config.ceiling;
    let mut reference = None;
    let mut records = Vec::new();
    for &arm in arms {
        let (solution, secs) = timed(arm, &problem, config.ceiling)?;
        let error = if config.check && dense_ok {
            if reference.is_none() {
                reference = Some(match arm {
                    Arm::Naive => solution.clone(),
                    Arm::Streamlined => oracle_problem(&problem, config.ceiling)?,
                });
            }
            solution.compare(reference.as_ref().unwrap()).map(|a| a.max_relative())
        } else {
            None
        };
        records.push(BenchmarkRecord {
            levels: config.spec.levels.count(),
            m,
            p: config.spec.p,
            q1: config.spec.q1,
            q2: if config.spec.levels == Levels::Three { config.spec.q2 } else { 0 },
            replication: rep,
            arm,
            wall_time_seconds: secs,
            max_rel_error_vs_oracle: error,
            seed,
        });
    }
    Ok(records)
}

/// Runs every replication of every ladder rung. Only the solve call is timed. A streamlined
/// solve at the largest rung and one extra replication per rung are run first and discarded as
/// warm-up. The naive arm is skipped with a
/// notice at rungs where some replication's system order exceeds `config.ceiling`.
pub fn run_bench(config: &BenchConfig, mut progress: impl FnMut(&str)) -> Result<BenchOutcome> {
    config.spec.validate()?;
    if config.ladder.iter().any(|&m| m == 0) {
        return Err(Error::InvalidSpec("ladder entries must be positive".into()));
    }
    let mut records = Vec::new();
    let mut notices = Vec::new();
    if config.replications > 0 {
        // Untimed pass at the largest rung so the allocator and caches are warm for every rung.
        if let Some(&largest) = config.ladder.iter().max() {
            replicate(config, largest, 0, &[Arm::Streamlined])?;
        }
        for &m in &config.ladder {
            let mut order = 0;
            for r in 0..config.replications {
                let spec = config.spec.clone().with_m(m).with_seed(config.spec.seed.wrapping_add(r as u64));
                order = order.max(generate(&spec)?.order());
            }
            let arms: Vec<Arm> = config
                .arms
                .iter()
                .copied()
                .filter(|&arm| {
                    let skip = arm == Arm::Naive && order > config.ceiling;
                    if skip {
                        let note = format!("m={m}: naive arm skipped, order {order} exceeds ceiling {}", config.ceiling);
                        progress(&note);
                        notices.push(note);
                    }
                    !skip
                })
                .collect();
            if arms.is_empty() {
                continue;
            }
            replicate(config, m, 0, &arms)?;
            let reps: Vec<Vec<BenchmarkRecord>> = if config.parallel {
                (0..config.replications).into_par_iter().map(|r| replicate(config, m, r, &arms)).collect::<Result<_>>()?
            } else {
                (0..config.replications).map(|r| replicate(config, m, r, &arms)).collect::<Result<_>>()?
            };
            records.extend(reps.into_iter().flatten());
            progress(&format!("m={m}: {} replications done", config.replications));
        }
    }
    let report = BenchmarkReport::from_records(&records);
    Ok(BenchOutcome { records, report, notices })
}

const RECORD_HEADER: &str = "levels\tm\tp\tq1\tq2\treplication\tarm\twall_time_seconds\tmax_rel_error_vs_oracle\tseed";

/// Tab-separated record stream with a header row; an absent error is written as `-`.
pub fn write_records(records: &[BenchmarkRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        let err = r.max_rel_error_vs_oracle.map_or("-".to_string(), format_f64);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.levels,
            r.m,
            r.p,
            r.q1,
            r.q2,
            r.replication,
            r.arm.as_str(),
            format_f64(r.wall_time_seconds),
            err,
            r.seed
        );
    }
    out
}

pub fn read_records(text: &str) -> Result<Vec<BenchmarkRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RECORD_HEADER => {}
        _ => return Err(Error::Parse { line: 1, message: "missing record header".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            let bad = |what: &str| Error::Parse { line, message: format!("bad {what}") };
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 10 {
                return Err(bad("field count"));
            }
            let num = |k: usize, what: &str| f[k].parse::<usize>().map_err(|_| bad(what));
            Ok(BenchmarkRecord {
                levels: f[0].parse().map_err(|_| bad("levels"))?,
                m: num(1, "m")?,
                p: num(2, "p")?,
                q1: num(3, "q1")?,
                q2: num(4, "q2")?,
                replication: num(5, "replication")?,
                arm: f[6].parse().map_err(|_| bad("arm"))?,
                wall_time_seconds: f[7].parse().map_err(|_| bad("wall time"))?,
                max_rel_error_vs_oracle: match f[8] {
                    "-" => None,
                    v => Some(v.parse().map_err(|_| bad("error"))?),
                },
                seed: f[9].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(replications: usize) -> BenchConfig {
        BenchConfig {
            spec: GenSpec::two_level(1, 2, 2, (5, 8), 1),
            ladder: vec![3, 6],
            replications,
            arms: vec![Arm::Streamlined, Arm::Naive],
            ceiling: 13,
            check: true,
            parallel: false,
        }
    }

    #[test]
    fn summary_statistics() {
        let s = ArmSummary::from_times(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!((s.count, s.mean, s.median), (4, 4.0, 2.5));
        assert!((s.sd - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(ArmSummary::from_times(&[]), None);
        assert_eq!(ArmSummary::from_times(&[0.5]).unwrap().sd, 0.0);
    }

    #[test]
    fn zero_replications_give_an_empty_report() {
        let out = run_bench(&config(0), |_| {}).unwrap();
        assert!(out.records.is_empty());
        assert!(out.report.rows.is_empty());
    }

    #[test]
    fn naive_is_skipped_above_ceiling_and_errors_are_small() {
        let out = run_bench(&config(2), |_| {}).unwrap();
        assert_eq!(out.notices.len(), 1);
        let row6 = out.report.row(6).unwrap();
        assert!(row6.naive.is_none() && row6.mean_ratio().is_none());
        assert!(out.report.row(3).unwrap().mean_ratio().is_some());
        for r in &out.records {
            assert!(r.wall_time_seconds >= 0.0);
            match (r.m, r.max_rel_error_vs_oracle) {
                (3, Some(e)) => assert!(e < 1e-8),
                (3, None) => panic!("missing check at m=3"),
                (_, e) => assert!(e.is_none()),
            }
        }
    }

    #[test]
    fn records_round_trip_and_recompute_the_report() {
        let out = run_bench(&config(3), |_| {}).unwrap();
        let back = read_records(&write_records(&out.records)).unwrap();
        assert_eq!(back, out.records);
        assert_eq!(BenchmarkReport::from_records(&back), out.report);
    }
}
