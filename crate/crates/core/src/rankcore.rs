//! Permutations, initial ranks and rank arrays.
//!
//! Every interface is 1-indexed: position `i` of a permutation is `s_i`, and
//! the rank-array entry `(j, k)` is the rank of `s_j` among `s_1..s_k`, where
//! smaller permutation values count as larger sample values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{1..n}`, stored as its images `s_1..s_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n];
        for (i, &v) in images.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} at position {} is outside 1..={n}",
                    i + 1
                )));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    /// The order-reversing permutation `(n, n-1, .., 1)`.
    pub fn reversal(n: usize) -> Self {
        Permutation {
            images: (1..=n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `s_i`, 1-indexed.
    pub fn get(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    /// `(self ∘ other)_i = self_{other_i}`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i - 1]).collect(),
        }
    }

    /// All permutations of `{1..n}` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.images)
    }
}

/// Initial ranks `(R_1..R_n)` with `1 <= R_k <= k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RankTuple {
    ranks: Vec<usize>,
}

impl RankTuple {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidRankTuple("empty".into()));
        }
        for (i, &r) in ranks.iter().enumerate() {
            let k = i + 1;
            if r == 0 || r > k {
                return Err(Error::InvalidRankTuple(format!("R_{k} = {r} is outside 1..={k}")));
            }
        }
        Ok(RankTuple { ranks })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// `R_k`, 1-indexed.
    pub fn get(&self, k: usize) -> usize {
        self.ranks[k - 1]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

impl TryFrom<Vec<usize>> for RankTuple {
    type Error = Error;

    fn try_from(ranks: Vec<usize>) -> Result<Self> {
        RankTuple::new(ranks)
    }
}

impl From<RankTuple> for Vec<usize> {
    fn from(r: RankTuple) -> Self {
        r.ranks
    }
}

impl fmt::Display for RankTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.ranks)
    }
}

/// The full `n x n` array of partial ranks of a permutation, including the
/// entries below the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankArray {
    n: usize,
    entries: Vec<usize>,
}

impl RankArray {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `rho_{j,k}`, 1-indexed.
    pub fn get(&self, j: usize, k: usize) -> usize {
        self.entries[(j - 1) * self.n + (k - 1)]
    }

    pub fn diagonal(&self) -> RankTuple {
        RankTuple {
            ranks: (1..=self.n).map(|k| self.get(k, k)).collect(),
        }
    }

    /// Column `k`, rows `1..=n`.
    pub fn column(&self, k: usize) -> Vec<usize> {
        (1..=self.n).map(|j| self.get(j, k)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (1..=self.n)
            .map(|j| (1..=self.n).map(|k| self.get(j, k)).collect())
            .collect()
    }
}

impl fmt::Display for RankArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, row) in self.rows().iter().enumerate() {
            if j > 0 {
                writeln!(f)?;
            }
            write_joined(f, row)?;
        }
        Ok(())
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, values: &[usize]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn check_distinct(values: &[f64]) -> Result<()> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    for w in idx.windows(2) {
        if values[w[0]] == values[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::Tie {
                first: a + 1,
                second: b + 1,
            });
        }
    }
    Ok(())
}

/// `R_k = 1 + #{i < k : y_i > y_k}`.
pub fn initial_ranks(y: &[f64]) -> Result<RankTuple> {
    if y.is_empty() {
        return Err(Error::InvalidRankTuple("empty sample".into()));
    }
    check_distinct(y)?;
    Ok(initial_ranks_unchecked(y))
}

pub(crate) fn initial_ranks_unchecked(y: &[f64]) -> RankTuple {
    let ranks = (0..y.len())
        .map(|k| 1 + y[..k].iter().filter(|&&v| v > y[k]).count())
        .collect();
    RankTuple { ranks }
}

/// `rho_{j,k} = 1 + #{i <= k : s_i < s_j}` for all `j, k`.
pub fn rank_array(s: &Permutation) -> RankArray {
    let n = s.len();
    let mut entries = vec![0; n * n];
    for j in 0..n {
        let mut below = 0;
        for k in 0..n {
            if s.images[k] < s.images[j] {
                below += 1;
            }
            entries[j * n + k] = 1 + below;
        }
    }
    RankArray { n, entries }
}

/// Extends an upper entry along its row: given `rho_{j,k}` and the diagonal
/// entries `rho_{k+1,k+1}..rho_{k',k'}`, returns `rho_{j,k'}`.
///
/// Each later arrival whose initial rank is at most the current rank of row
/// `j` lands above it and pushes it down by one.
pub fn extend_row(rho_jk: usize, k: usize, diagonal: &[usize]) -> Result<usize> {
    if k == 0 || rho_jk == 0 || rho_jk > k {
        return Err(Error::OutOfRange {
            what: "row entry",
            detail: format!("rho_(j,{k}) = {rho_jk} must lie in 1..={k}"),
        });
    }
    let mut current = rho_jk;
    for (offset, &r) in diagonal.iter().enumerate() {
        let l = k + 1 + offset;
        if r == 0 || r > l {
            return Err(Error::OutOfRange {
                what: "diagonal entry",
                detail: format!("rho_({l},{l}) = {r} must lie in 1..={l}"),
            });
        }
        if r <= current {
            current += 1;
        }
    }
    Ok(current)
}

/// Restricts a column to an earlier stage: given column `k'` entries
/// `rho_{1,k'}..rho_{m,k'}` with `m >= max(j, k)`, returns
/// `rho_{j,k} = 1 + #{i <= k : rho_{i,k'} < rho_{j,k'}}`.
pub fn column_restrict(column: &[usize], j: usize, k: usize) -> Result<usize> {
    let needed = j.max(k);
    if j == 0 || k == 0 || column.len() < needed {
        return Err(Error::OutOfRange {
            what: "column restriction",
            detail: format!(
                "need rows 1..={needed} of the column, got {} (j = {j}, k = {k})",
                column.len()
            ),
        });
    }
    let prefix = &column[..needed];
    let mut sorted = prefix.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted[0] == 0 {
        return Err(Error::OutOfRange {
            what: "column restriction",
            detail: "column entries must be distinct positive ranks".into(),
        });
    }
    let target = column[j - 1];
    Ok(1 + column[..k].iter().filter(|&&v| v < target).count())
}

/// The unique permutation whose rank-array diagonal is `r`.
pub fn permutation_from_initial_ranks(r: &RankTuple) -> Permutation {
    let n = r.len();
    let mut available: Vec<usize> = (1..=n).collect();
    let mut images = vec![0; n];
    for k in (1..=n).rev() {
        // s_k is the R_k-th smallest of the values still unassigned to s_1..s_k
        images[k - 1] = available.remove(r.get(k) - 1);
    }
    Permutation { images }
}

/// `(a^s)_i = a_{s_i}`.
pub fn apply_permutation<T: Clone>(a: &[T], s: &Permutation) -> Vec<T> {
    s.images.iter().map(|&i| a[i - 1].clone()).collect()
}

/// Sorts `a` into non-increasing order, returning the sorted values and the
/// permutation `delta` with `sorted[i] = a[delta_i]`.
pub fn descending_permutation(a: &[f64]) -> Result<(Vec<f64>, Permutation)> {
    if a.is_empty() {
        return Err(Error::InvalidPermutation("empty sample".into()));
    }
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&p, &q| a[q].total_cmp(&a[p]));
    for w in idx.windows(2) {
        if a[w[0]] == a[w[1]] {
            let (p, q) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::Tie {
                first: p + 1,
                second: q + 1,
            });
        }
    }
    let sorted = idx.iter().map(|&i| a[i]).collect();
    let delta = Permutation {
        images: idx.into_iter().map(|i| i + 1).collect(),
    };
    Ok((sorted, delta))
}
