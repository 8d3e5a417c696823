//! Uniform m-point processes on finite unions of intervals.
//!
//! `N_{m,B}` places `m` independent uniform points on `B`; its counts on a
//! partition `A_1..A_k` of `[0, 1]` are multinomial with cell probabilities
//! `Leb(A_j ∩ B) / Leb(B)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::scalar::Scalar;

/// Attempts allowed to [`sample_conditioned`] before it gives up.
pub const MAX_REJECTION_ATTEMPTS: u64 = 10_000_000;

/// Cell counts `i_1..i_k`.
pub type CountVector = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct PointProcess {
    m: usize,
    support: IntervalSet,
    length: f64,
}

impl PointProcess {
    pub fn new(m: usize, support: IntervalSet) -> Result<Self> {
        let length = support.length();
        if length.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroMeasure);
        }
        Ok(PointProcess { m, support, length })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn support(&self) -> &IntervalSet {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.m)
            .map(|_| self.support.point_at(rng.random::<f64>() * self.length))
            .collect()
    }
}

/// `m` independent points uniform on `support`.
pub fn sample_point_process<R: Rng + ?Sized>(m: usize, support: &IntervalSet, rng: &mut R) -> Result<Vec<f64>> {
    Ok(PointProcess::new(m, support.clone())?.sample(rng))
}

/// Checks that `cells` are pairwise disjoint up to null sets and cover `[0, 1]`.
pub fn check_partition<T: Scalar>(cells: &[IntervalSet<T>]) -> Result<()> {
    for (i, a) in cells.iter().enumerate() {
        for (j, b) in cells.iter().enumerate().skip(i + 1) {
            if !a.intersect(b).is_empty() {
                return Err(Error::InvalidPartition(format!(
                    "cells {} and {} overlap",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let union = cells.iter().fold(IntervalSet::empty(), |acc, c| acc.union(c));
    if union != IntervalSet::unit() {
        return Err(Error::InvalidPartition("cells do not cover [0, 1]".into()));
    }
    Ok(())
}

/// Index of the first cell containing `x`.
pub fn cell_of<T: Scalar>(cells: &[IntervalSet<T>], x: &T) -> Option<usize> {
    cells.iter().position(|c| c.contains(x))
}

/// Counts of `points` per cell.
pub fn cell_counts(cells: &[IntervalSet], points: &[f64]) -> CountVector {
    let mut counts = vec![0; cells.len()];
    for x in points {
        if let Some(i) = cell_of(cells, x) {
            counts[i] += 1;
        }
    }
    counts
}

/// `P(N(A_j) = i_j for all j)` for the process `N_{m,B}`.
pub fn multinomial_pmf<T: Scalar>(
    m: usize,
    support: &IntervalSet<T>,
    cells: &[IntervalSet<T>],
    counts: &[usize],
) -> Result<T> {
    if counts.len() != cells.len() {
        return Err(Error::InvalidPartition(format!(
            "{} counts for {} cells",
            counts.len(),
            cells.len()
        )));
    }
    let total: usize = counts.iter().sum();
    if total != m {
        return Err(Error::CountMismatch {
            expected: m,
            got: total,
        });
    }
    check_partition(cells)?;
    let length = support.length();
    if length <= T::zero() {
        return Err(Error::ZeroMeasure);
    }
    let mut p = T::one();
    let mut placed = 0i64;
    for (cell, &count) in cells.iter().zip(counts) {
        let q = cell.intersect(support).length() / length.clone();
        for i in 1..=count as i64 {
            placed += 1;
            // running multinomial coefficient: placed / i per point
            p = p * T::from_ratio(placed, i) * q.clone();
        }
    }
    Ok(p)
}

/// All compositions of `m` into `k` nonnegative parts, in lexicographic order.
pub fn compositions(m: usize, k: usize) -> Vec<CountVector> {
    fn rec(m: usize, k: usize, prefix: &mut CountVector, out: &mut Vec<CountVector>) {
        if k == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=m {
            prefix.push(first);
            rec(m - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(m, k, &mut Vec::with_capacity(k), &mut out);
    } else if m == 0 {
        out.push(Vec::new());
    }
    out
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_order_statistic(n: usize, r: usize, y: f64) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::OutOfRange {
            what: "order statistic",
            detail: format!("r = {r} is outside 1..={n}"),
        });
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfRange {
            what: "threshold",
            detail: format!("y = {y} is outside [0, 1]"),
        });
    }
    Ok(())
}

/// `P(X↓_r > y)` for `n` i.u.d. points: at least `r` of them exceed `y`.
pub fn order_statistic_tail(n: usize, r: usize, y: f64) -> Result<f64> {
    check_order_statistic(n, r, y)?;
    Ok((r..=n)
        .map(|j| binomial(n, j) * (1.0 - y).powi(j as i32) * y.powi((n - j) as i32))
        .sum())
}

/// Leading term `C(n, r) y^{n-r} (1-y)^r` of the tail as `y → 1`.
pub fn order_statistic_leading_term(n: usize, r: usize, y: f64) -> Result<f64> {
    check_order_statistic(n, r, y)?;
    Ok(binomial(n, r) * y.powi((n - r) as i32) * (1.0 - y).powi(r as i32))
}

/// Parameters of `N_{m,B}` restricted to `A_2 = [0,1] \ A_1` given that
/// `observed` points fell in `A_1`: the process `N_{m - observed, B ∩ A_2}`.
pub fn restrict_process(
    m: usize,
    support: &IntervalSet,
    a1: &IntervalSet,
    observed: usize,
) -> Result<(usize, IntervalSet)> {
    if observed > m {
        return Err(Error::CountMismatch {
            expected: m,
            got: observed,
        });
    }
    Ok((m - observed, support.intersect(&a1.complement())))
}

/// Samples `process` conditioned on exactly `required` points in `cell`, by
/// rejection.
pub fn sample_conditioned<R: Rng + ?Sized>(
    process: &PointProcess,
    cell: &IntervalSet,
    required: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let points = process.sample(rng);
        if points.iter().filter(|x| cell.contains(x)).count() == required {
            return Ok(points);
        }
    }
    Err(Error::RejectionCap {
        attempts: MAX_REJECTION_ATTEMPTS,
    })
}
