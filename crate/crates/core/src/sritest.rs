//! Chi-square tests of strong rank independence.
//!
//! For each tested `k`, trials are binned by the cell of a finite partition
//! of `[0,1]^{k-1}` containing `(Y_1..Y_{k-1})` and by `R_k`. Independence
//! means every cell has the same rank distribution `p_{k,·}`, which is tested
//! by Pearson's homogeneity statistic.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rearrangements::{sample_trial, Kind, RearrangementSpec};
use crate::stats::{homogeneity, ChiSquare};
use crate::stream::{domain, run_trials, RunConfig, TrialStreams};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Default trial count.
pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Minimum trials per (cell, rank) pair.
pub const MIN_TRIALS_PER_CELL_RANK: u64 = 10;

/// Product of per-coordinate intervals `[lo, hi)`, closed at 1.
pub type CellBox = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningPartition {
    k: usize,
    label: String,
    cells: Vec<CellBox>,
}

fn in_interval(x: f64, (lo, hi): (f64, f64)) -> bool {
    lo <= x && (x < hi || (hi == 1.0 && x == 1.0))
}

impl ConditioningPartition {
    /// Validates that `cells` are boxes in `[0,1]^{k-1}` with disjoint
    /// interiors and total volume 1.
    pub fn from_cells(k: usize, label: impl Into<String>, cells: Vec<CellBox>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidPartition(format!("k = {k} has nothing to condition on")));
        }
        let dim = k - 1;
        if cells.is_empty() {
            return Err(Error::InvalidPartition("no cells".into()));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim {
                return Err(Error::InvalidPartition(format!(
                    "cell {} has dimension {}, expected {dim}",
                    c + 1,
                    cell.len()
                )));
            }
            if cell.iter().any(|&(lo, hi)| !(0.0 <= lo && lo < hi && hi <= 1.0)) {
                return Err(Error::InvalidPartition(format!(
                    "cell {} is not a box in the unit cube",
                    c + 1
                )));
            }
        }
        for (a, ca) in cells.iter().enumerate() {
            for (b, cb) in cells.iter().enumerate().skip(a + 1) {
                if ca.iter().zip(cb).all(|(x, y)| x.0.max(y.0) < x.1.min(y.1)) {
                    return Err(Error::InvalidPartition(format!(
                        "cells {} and {} overlap",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        let volume: f64 = cells
            .iter()
            .map(|cell| cell.iter().map(|(lo, hi)| hi - lo).product::<f64>())
            .sum();
        if (volume - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPartition(format!("cells cover volume {volume}, not 1")));
        }
        Ok(ConditioningPartition {
            k,
            label: label.into(),
            cells,
        })
    }

    /// Splits the last `min(k-1, 3)` coordinates at 1/2.
    pub fn dyadic(k: usize) -> Result<Self> {
        let dim = k.saturating_sub(1);
        let split = dim.min(3);
        let cells = (0..1usize << split)
            .map(|bits| {
                (0..dim)
                    .map(|d| match d.checked_sub(dim - split) {
                        Some(b) if bits >> b & 1 == 1 => (0.5, 1.0),
                        Some(_) => (0.0, 0.5),
                        None => (0.0, 1.0),
                    })
                    .collect()
            })
            .collect();
        Self::from_cells(k, "dyadic", cells)
    }

    /// Splits coordinate `axis` (1-indexed) into `bins` equal intervals.
    pub fn grid(k: usize, axis: usize, bins: usize) -> Result<Self> {
        if axis == 0 || axis >= k || bins == 0 {
            return Err(Error::InvalidPartition(format!(
                "grid axis {axis} with {bins} bins at k = {k}"
            )));
        }
        let cells = (0..bins)
            .map(|b| {
                let mut cell = vec![(0.0, 1.0); k - 1];
                cell[axis - 1] = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
                cell
            })
            .collect();
        Self::from_cells(k, format!("grid(axis={axis},bins={bins})"), cells)
    }

    /// Three cells on `Y_{k-1} ∈ I_1, I_2, I_3`, where `I_2 = {f_θ ≤ c}`.
    pub fn sublevel(k: usize, theta: f64, c: f64) -> Result<Self> {
        if !(0.0 < theta && theta < 1.0 && 0.0 < c && c < 1.0) {
            return Err(Error::InvalidPartition(format!(
                "sublevel cells need θ, c in (0, 1), got {theta}, {c}"
            )));
        }
        let a = theta * (1.0 - c);
        let b = theta + c * (1.0 - theta);
        let cells = [(0.0, a), (a, b), (b, 1.0)]
            .into_iter()
            .map(|iv| {
                let mut cell = vec![(0.0, 1.0); k - 1];
                cell[k - 2] = iv;
                cell
            })
            .collect();
        Self::from_cells(k, format!("sublevel(theta={theta},c={c})"), cells)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cells(&self) -> &[CellBox] {
        &self.cells
    }

    /// Index of the cell containing `prefix = (y_1..y_{k-1})`.
    pub fn cell_of(&self, prefix: &[f64]) -> Option<usize> {
        self.cells
            .iter()
            .position(|cell| cell.iter().zip(prefix).all(|(&iv, &x)| in_interval(x, iv)))
    }
}

/// The dyadic partition for every `k ∈ 2..=n`, plus sublevel cells at
/// `c = 1/2` for travellers' specs.
pub fn default_partitions(spec: &RearrangementSpec) -> Result<Vec<ConditioningPartition>> {
    let mut out = Vec::new();
    for k in 2..=spec.n() {
        out.push(ConditioningPartition::dyadic(k)?);
        if let Kind::Travellers(t) = spec.kind() {
            if 0.0 < t.theta() && t.theta() < 1.0 {
                out.push(ConditioningPartition::sublevel(k, t.theta(), 0.5)?);
            }
        }
    }
    Ok(out)
}

/// `counts[cell][ℓ - 1]` for one partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(k: usize, cells: usize) -> Self {
        ContingencyTable {
            k,
            counts: vec![vec![0; k]; cells],
        }
    }

    pub fn totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn grand_total(&self) -> u64 {
        self.totals().iter().sum()
    }

    /// One row per cell, one column per rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell");
        for l in 1..=self.k {
            let _ = write!(out, ",rank_{l}");
        }
        out.push('\n');
        for (c, row) in self.counts.iter().enumerate() {
            let _ = write!(out, "{}", c + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    fn add(&mut self, other: &ContingencyTable) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionTest {
    pub partition: String,
    pub cells: usize,
    pub table: ContingencyTable,
    pub chi_square: ChiSquare,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub k: usize,
    /// `p_hat[ℓ - 1]`: marginal frequency of `R_k = ℓ`.
    pub p_hat: Vec<f64>,
    /// Trials with `1 < R_k < k`.
    pub interior_ranks: u64,
    pub tests: Vec<PartitionTest>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SriReport {
    pub kind: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub alpha: f64,
    /// Number of tests sharing `alpha` under the Bonferroni correction.
    pub bonferroni_tests: usize,
    pub per_test_alpha: f64,
    pub ranks: Vec<RankReport>,
    pub pass: bool,
}

impl SriReport {
    pub fn rank(&self, k: usize) -> Option<&RankReport> {
        self.ranks.iter().find(|r| r.k == k)
    }

    pub fn p_hat(&self, k: usize, l: usize) -> f64 {
        self.rank(k).map_or(0.0, |r| r.p_hat.get(l - 1).copied().unwrap_or(0.0))
    }
}

/// Minimum trials for a partition at rank index `k`.
pub fn required_trials(partition: &ConditioningPartition) -> u64 {
    MIN_TRIALS_PER_CELL_RANK * partition.cells.len() as u64 * partition.k as u64
}

struct Tally {
    marginals: Vec<Vec<u64>>,
    tables: Vec<ContingencyTable>,
}

/// Samples `config.trials` trials of `spec` and tests every partition,
/// Bonferroni-correcting `alpha` over the number of partitions.
pub fn run_sri_test(
    spec: &RearrangementSpec,
    partitions: &[ConditioningPartition],
    config: &RunConfig,
    alpha: f64,
) -> Result<SriReport> {
    let n = spec.n();
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            detail: format!("{alpha} is outside (0, 1)"),
        });
    }
    for p in partitions {
        if p.k > n {
            return Err(Error::InvalidPartition(format!(
                "partition for k = {} but n = {n}",
                p.k
            )));
        }
        let required = required_trials(p);
        if config.trials < required {
            return Err(Error::Underpowered {
                k: p.k,
                trials: config.trials,
                required,
            });
        }
    }
    let init = || Tally {
        marginals: (1..=n).map(|k| vec![0u64; k]).collect(),
        tables: partitions
            .iter()
            .map(|p| ContingencyTable::new(p.k, p.cells.len()))
            .collect(),
    };
    let streams = TrialStreams::new(config.seed, domain::SRI);
    let tally = run_trials(
        &streams,
        config.trials,
        config.workers,
        init,
        |acc, _, rng| {
            let rec = sample_trial(spec, rng)?;
            let ranks = rec.ranks.ranks();
            for (k, &r) in ranks.iter().enumerate() {
                acc.marginals[k][r - 1] += 1;
            }
            for (p, table) in partitions.iter().zip(acc.tables.iter_mut()) {
                let cell = p.cell_of(&rec.y[..p.k - 1]).ok_or_else(|| {
                    Error::InvalidPartition(format!("no cell of {} contains {:?}", p.label, &rec.y[..p.k - 1]))
                })?;
                table.counts[cell][ranks[p.k - 1] - 1] += 1;
            }
            Ok(())
        },
        |acc, part| {
            for (a, b) in acc.marginals.iter_mut().zip(&part.marginals) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            for (a, b) in acc.tables.iter_mut().zip(&part.tables) {
                a.add(b);
            }
        },
    )?;

    let tests = partitions.len();
    let per_test_alpha = if tests == 0 { alpha } else { alpha / tests as f64 };
    let mut tables: Vec<Option<ContingencyTable>> = tally.tables.into_iter().map(Some).collect();
    let ranks: Vec<RankReport> = (1..=n)
        .map(|k| {
            let marg = &tally.marginals[k - 1];
            let total: u64 = marg.iter().sum();
            let p_hat = marg
                .iter()
                .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                .collect();
            let interior_ranks = if k > 2 { marg[1..k - 1].iter().sum() } else { 0 };
            let tests: Vec<PartitionTest> = partitions
                .iter()
                .zip(tables.iter_mut())
                .filter(|(p, _)| p.k == k)
                .map(|(p, t)| {
                    let table = t.take().expect("each table is reported once");
                    let chi_square = homogeneity(&table.counts);
                    PartitionTest {
                        partition: p.label.clone(),
                        cells: p.cells.len(),
                        pass: chi_square.p_value >= per_test_alpha,
                        chi_square,
                        table,
                    }
                })
                .collect();
            let pass = tests.iter().all(|t| t.pass);
            RankReport {
                k,
                p_hat,
                interior_ranks,
                tests,
                pass,
            }
        })
        .collect();
    let pass = ranks.iter().all(|r| r.pass);
    Ok(SriReport {
        kind: spec.kind().name().to_string(),
        n,
        trials: config.trials,
        seed: config.seed,
        alpha,
        bonferroni_tests: tests,
        per_test_alpha,
        ranks,
        pass,
    })
}

/// Tests independence of `R_k` from `(Y_1..Y_{k-1})` alone.
pub fn run_single_rank_test(
    spec: &RearrangementSpec,
    partition: &ConditioningPartition,
    config: &RunConfig,
    alpha: f64,
) -> Result<RankReport> {
    let k = partition.k;
    let report = run_sri_test(spec, std::slice::from_ref(partition), config, alpha)?;
    Ok(report.ranks.into_iter().nth(k - 1).expect("k is within 1..=n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtremeRankCheck {
    /// Whether the spec orders points by a directing function.
    pub applies: bool,
    /// No trial had `1 < R_k < k`.
    pub extreme_only: bool,
    /// Independence passed while interior ranks occurred under a directing
    /// function, which cannot happen for a correct implementation.
    pub contradiction: bool,
}

/// Checks that a binary spec only produced the ranks `1` and `k`.
pub fn extreme_rank_check(report: &SriReport, spec: &RearrangementSpec) -> ExtremeRankCheck {
    let applies = matches!(spec.kind(), Kind::Binary(_) | Kind::Travellers(_));
    let extreme_only = report.ranks.iter().all(|r| r.interior_ranks == 0);
    ExtremeRankCheck {
        applies,
        extreme_only,
        contradiction: applies && report.pass && !extreme_only,
    }
}
