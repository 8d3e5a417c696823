//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rearrange::directing::PiecewiseLinearFn;
use rearrange::rearrangements::{Block, FixedPair, GeneralConstructionSpec, RandomizedBlockSpec, RankLaw};
use rearrange::{Permutation, RearrangementSpec};

/// `1 + #{i <= k : s_i < s_j}` evaluated literally.
pub fn rho_direct(s: &[usize], j: usize, k: usize) -> usize {
    1 + (1..=k).filter(|&i| s[i - 1] < s[j - 1]).count()
}

/// Initial ranks by brute force over the prefix.
pub fn ranks_direct(y: &[f64]) -> Vec<usize> {
    (0..y.len())
        .map(|k| 1 + (0..k).filter(|&i| y[i] > y[k]).count())
        .collect()
}

/// `4 sqrt(p (1 - p) / trials)`.
pub fn four_sigma(p: f64, trials: u64) -> f64 {
    4.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

pub fn example2(theta: f64) -> RearrangementSpec {
    RearrangementSpec::general(GeneralConstructionSpec {
        n: 3,
        fixed_values: vec![1],
        fixed_positions: vec![1],
        blocks: vec![
            Block {
                positions: vec![],
                values: vec![],
            },
            Block {
                positions: vec![2, 3],
                values: vec![2, 3],
            },
        ],
        thetas: vec![None, Some(theta)],
    })
    .unwrap()
}

/// `Y_3 = X↓_3`, `{Y_1, Y_2} = {X↓_4, X↓_5}`, `{Y_4, Y_5} = {X↓_1, X↓_2}`.
/// `theta_low` orders the pair below the fixed value.
pub fn example3(theta_low: f64, theta_high: f64) -> RearrangementSpec {
    RearrangementSpec::general(GeneralConstructionSpec {
        n: 5,
        fixed_values: vec![3],
        fixed_positions: vec![3],
        blocks: vec![
            Block {
                positions: vec![4, 5],
                values: vec![1, 2],
            },
            Block {
                positions: vec![1, 2],
                values: vec![4, 5],
            },
        ],
        thetas: vec![Some(theta_high), Some(theta_low)],
    })
    .unwrap()
}

/// `Y_2 = X↓_3`, `{Y_1, Y_4} = {X↓_4, X↓_5}`, `{Y_3, Y_5} = {X↓_1, X↓_2}`.
pub fn example3_variant(theta_low: f64, theta_high: f64) -> RearrangementSpec {
    RearrangementSpec::general(GeneralConstructionSpec {
        n: 5,
        fixed_values: vec![3],
        fixed_positions: vec![2],
        blocks: vec![
            Block {
                positions: vec![3, 5],
                values: vec![1, 2],
            },
            Block {
                positions: vec![1, 4],
                values: vec![4, 5],
            },
        ],
        thetas: vec![Some(theta_high), Some(theta_low)],
    })
    .unwrap()
}

/// `(Y_1, Y_2, Y_3) = (X↓_1, X↓_3, X↓_5)`, the rest shuffled uniformly.
pub fn example4() -> RearrangementSpec {
    RearrangementSpec::randomized_block(RandomizedBlockSpec {
        n: 6,
        fixed: vec![
            FixedPair { position: 1, value: 1 },
            FixedPair { position: 2, value: 3 },
            FixedPair { position: 3, value: 5 },
        ],
        blocks: vec![Block {
            positions: vec![4, 5, 6],
            values: vec![2, 4, 6],
        }],
    })
    .unwrap()
}

/// Rank law of every position of a general construction, derived from the
/// value-index layout alone: a position's rank is its value's rank among the
/// earlier positions, where values inside one block are ordered by the
/// block's travellers' rule and values in different groups are ordered by
/// their group.
pub fn general_law_oracle(spec: &GeneralConstructionSpec, k: usize) -> RankLaw {
    // group of each position: fixed value n_i sits between block i and block i+1
    let mut group = vec![(0usize, 0usize); spec.n + 1];
    for (i, (&m, &v)) in spec.fixed_positions.iter().zip(&spec.fixed_values).enumerate() {
        group[m] = (2 * i + 2, v);
    }
    for (i, b) in spec.blocks.iter().enumerate() {
        for &p in &b.positions {
            group[p] = (2 * i + 1, 0);
        }
    }
    // descending order: smaller group index means larger value
    let (gk, _) = group[k];
    let larger = (1..k).filter(|&h| group[h].0 < gk).count();
    let same: usize = (1..k).filter(|&h| group[h].0 == gk).count();
    let mut law = BTreeMap::new();
    if gk % 2 == 0 || same == 0 {
        law.insert(1 + larger, 1.0);
    } else {
        let theta = spec.thetas[(gk - 1) / 2].unwrap();
        law.insert(1 + larger, 1.0 - theta);
        law.insert(1 + larger + same, theta);
    }
    law
}

/// Canonicalization test suite: V shapes, scaled monotone maps, W shapes and
/// irregular zig-zags.
pub fn directing_suite() -> Vec<(String, PiecewiseLinearFn)> {
    let f = |name: &str, b: Vec<f64>, v: Vec<f64>| (name.to_string(), PiecewiseLinearFn::new(b, v).unwrap());
    let mut out = Vec::new();
    for theta in [0.2, 0.5, 0.7] {
        out.push(f(&format!("v_{theta}"), vec![0.0, theta, 1.0], vec![1.0, 0.0, 1.0]));
    }
    out.push(f("identity", vec![0.0, 1.0], vec![0.0, 1.0]));
    out.push(f("reversal", vec![0.0, 1.0], vec![1.0, 0.0]));
    out.push(f("scaled_identity", vec![0.0, 1.0], vec![0.1, 0.6]));
    out.push(f("scaled_reversal", vec![0.0, 1.0], vec![0.9, 0.3]));
    out.push(f("abs_half", vec![0.0, 0.5, 1.0], vec![0.5, 0.0, 0.5]));
    out.push(f("lopsided_v", vec![0.0, 0.3, 1.0], vec![0.2, 0.0, 0.9]));
    out.push(f("inverted_v", vec![0.0, 0.4, 1.0], vec![0.0, 1.0, 0.0]));
    out.push(f("w", vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![1.0, 0.0, 1.0, 0.0, 1.0]));
    out.push(f(
        "w_uneven",
        vec![0.0, 0.2, 0.45, 0.8, 1.0],
        vec![0.9, 0.1, 0.7, 0.0, 0.8],
    ));
    out.push(f(
        "w_scaled",
        vec![0.0, 0.25, 0.5, 0.75, 1.0],
        vec![0.5, 0.25, 0.5, 0.25, 0.5],
    ));
    out.push(f("m", vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.0, 1.0, 0.3, 1.0, 0.0]));
    out.push(f("sawtooth", vec![0.0, 0.5, 0.5000001, 1.0], vec![0.0, 1.0, 0.0, 1.0]));
    out.push(f("bent_monotone", vec![0.0, 0.3, 0.6, 1.0], vec![0.0, 0.5, 0.6, 1.0]));
    out.push(f(
        "kinked_v",
        vec![0.0, 0.1, 0.4, 0.7, 1.0],
        vec![1.0, 0.6, 0.0, 0.3, 0.8],
    ));
    out.push(f(
        "zigzag",
        vec![0.0, 0.15, 0.3, 0.5, 0.65, 0.85, 1.0],
        vec![0.4, 0.9, 0.1, 0.6, 0.05, 0.95, 0.5],
    ));
    out.push(f(
        "w_unequal_minima",
        vec![0.0, 0.3, 0.55, 0.7, 1.0],
        vec![0.8, 0.2, 0.6, 0.4, 1.0],
    ));
    out.push(f("steep_shallow", vec![0.0, 0.05, 1.0], vec![1.0, 0.0, 0.2]));
    out
}

/// Brute-force integral on a shifted `grid^3` lattice of
/// `P(R_3 = 1 | (Y_1, Y_2) in cell)` for the four dyadic cells, where `Y`
/// orders three i.u.d. points by `f` ascending.
pub fn dyadic_conditionals_n3(f: impl Fn(f64) -> f64, grid: usize) -> [f64; 4] {
    let pts: Vec<(f64, f64)> = (0..grid)
        .map(|i| {
            let x = (i as f64 + 0.381_966_011_250_105) / grid as f64;
            (x, f(x))
        })
        .collect();
    let mut hits = [0u64; 4];
    let mut mass = [0u64; 4];
    for a in &pts {
        for b in &pts {
            for c in &pts {
                let mut y = [*a, *b, *c];
                y.sort_by(|p, q| p.1.total_cmp(&q.1));
                let cell = (y[0].0 >= 0.5) as usize + 2 * (y[1].0 >= 0.5) as usize;
                mass[cell] += 1;
                if y[2].0 > y[0].0 && y[2].0 > y[1].0 {
                    hits[cell] += 1;
                }
            }
        }
    }
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = hits[i] as f64 / mass[i] as f64;
    }
    out
}

/// Exact `P(X² >= x)` for the Pearson statistic of a 2×2 table whose rows
/// are independent `Binomial(n1, p)` and `Binomial(n2, p)`, summing every
/// pair within eight standard deviations.
pub fn exact_two_by_two_tail(n1: u64, n2: u64, p: f64, thresholds: &[f64]) -> Vec<f64> {
    let pmf = |n: u64| -> Vec<(u64, f64)> {
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        let lo = (mean - 8.0 * sd).floor().max(0.0) as u64;
        let hi = ((mean + 8.0 * sd).ceil() as u64).min(n);
        (lo..=hi)
            .map(|k| {
                let ln = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
                (k, ln.exp())
            })
            .collect()
    };
    let (r1, r2) = (pmf(n1), pmf(n2));
    let mut tails = vec![0.0; thresholds.len()];
    for &(a, pa) in &r1 {
        for &(b, pb) in &r2 {
            let stat = pearson_2x2(a, n1 - a, b, n2 - b);
            for (t, &x) in tails.iter_mut().zip(thresholds) {
                if stat >= x {
                    *t += pa * pb;
                }
            }
        }
    }
    tails
}

pub fn pearson_2x2(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let den = (a + b) * (c + d) * (a + c) * (b + d);
    if den == 0.0 {
        0.0
    } else {
        n * (a * d - b * c).powi(2) / den
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

pub fn permutation(images: &[usize]) -> Permutation {
    Permutation::new(images.to_vec()).unwrap()
}
