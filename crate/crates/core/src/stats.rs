//! Pearson chi-square homogeneity tests and a few distribution-free helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Result of a Pearson chi-square test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    match ChiSquared::new(dof as f64) {
        Ok(dist) => dist.sf(statistic),
        Err(_) => f64::NAN,
    }
}

/// Chi-square test of homogeneity: are the column distributions of all rows
/// the same?
///
/// Rows and columns whose totals are zero carry no information about
/// homogeneity and are dropped before the degrees of freedom are counted.
pub fn homogeneity(rows: &[Vec<u64>]) -> ChiSquare {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let col_totals: Vec<u64> = (0..width)
        .map(|c| rows.iter().map(|r| r.get(c).copied().unwrap_or(0)).sum())
        .collect();
    let live_cols: Vec<usize> = (0..width).filter(|&c| col_totals[c] > 0).collect();
    let live_rows: Vec<&Vec<u64>> = rows
        .iter()
        .filter(|r| live_cols.iter().any(|&c| r.get(c).copied().unwrap_or(0) > 0))
        .collect();

    if live_rows.len() < 2 || live_cols.len() < 2 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }

    let grand: f64 = live_cols.iter().map(|&c| col_totals[c] as f64).sum();
    let mut statistic = 0.0;
    for row in &live_rows {
        let row_total: f64 = live_cols.iter().map(|&c| row.get(c).copied().unwrap_or(0) as f64).sum();
        for &c in &live_cols {
            let expected = row_total * col_totals[c] as f64 / grand;
            let diff = row.get(c).copied().unwrap_or(0) as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let dof = (live_rows.len() - 1) * (live_cols.len() - 1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
    }
}

/// Standard deviation of a binomial frequency estimate.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level `alpha` for sample size `n`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}
