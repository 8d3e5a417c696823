//! Fixed positions plus blocks whose values are placed in uniformly random
//! order, independently of the sample.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::general::{partition_defects, Block, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPair {
    pub position: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedBlockSpec {
    pub n: usize,
    pub fixed: Vec<FixedPair>,
    pub blocks: Vec<Block>,
}

/// Upper bound on the number of equiprobable block orderings enumerated for
/// exact rank laws.
pub const MAX_ENUMERATION: u128 = 1 << 22;

impl RandomizedBlockSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n;
        if n == 0 {
            out.push(Violation::ZeroSize);
            return out;
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.positions.is_empty() {
                out.push(Violation::EmptyBlock { block: i + 1 });
            }
            if b.positions.len() != b.values.len() {
                out.push(Violation::BlockSizeMismatch {
                    block: i + 1,
                    positions: b.positions.len(),
                    values: b.values.len(),
                });
            }
        }
        let positions = self
            .fixed
            .iter()
            .map(|f| &f.position)
            .chain(self.blocks.iter().flat_map(|b| b.positions.iter()));
        for &p in positions.clone() {
            if p == 0 || p > n {
                out.push(Violation::PositionOutOfRange { position: p });
            }
        }
        if let Some((missing, repeated)) = partition_defects(n, positions) {
            out.push(Violation::PositionsNotPartition { missing, repeated });
        }
        let values = self
            .fixed
            .iter()
            .map(|f| &f.value)
            .chain(self.blocks.iter().flat_map(|b| b.values.iter()));
        for &v in values.clone() {
            if v == 0 || v > n {
                out.push(Violation::ValueOutOfRange { value: v });
            }
        }
        if let Some((missing, repeated)) = partition_defects(n, values) {
            out.push(Violation::ValuesNotPartition { missing, repeated });
        }
        if out.is_empty() && self.orderings() > MAX_ENUMERATION {
            out.push(Violation::TooLarge {
                detail: format!(
                    "{} block orderings exceed the enumeration limit {MAX_ENUMERATION}",
                    self.orderings()
                ),
            });
        }
        out
    }

    /// Number of equally likely arrival permutations.
    pub fn orderings(&self) -> u128 {
        self.blocks
            .iter()
            .map(|b| (1..=b.values.len() as u128).product::<u128>())
            .fold(1u128, |acc, f| acc.saturating_mul(f))
    }

    pub(crate) fn arrival<R: Rng + ?Sized>(&self, rng: &mut R, mu: &mut [usize]) {
        for f in &self.fixed {
            mu[f.position - 1] = f.value;
        }
        for b in &self.blocks {
            let mut values = b.values.clone();
            values.shuffle(rng);
            let mut positions = b.positions.clone();
            positions.sort_unstable();
            for (p, v) in positions.into_iter().zip(values) {
                mu[p - 1] = v;
            }
        }
    }

    /// Visits every equally likely arrival permutation.
    pub(crate) fn for_each_arrival<F: FnMut(&[usize])>(&self, mut visit: F) {
        let mut mu = vec![0usize; self.n];
        for f in &self.fixed {
            mu[f.position - 1] = f.value;
        }
        let blocks: Vec<(Vec<usize>, Vec<usize>)> = self
            .blocks
            .iter()
            .map(|b| {
                let mut p = b.positions.clone();
                p.sort_unstable();
                (p, b.values.clone())
            })
            .collect();
        fill_blocks(&blocks, 0, &mut mu, &mut visit);
    }
}

fn fill_blocks<F: FnMut(&[usize])>(
    blocks: &[(Vec<usize>, Vec<usize>)],
    idx: usize,
    mu: &mut Vec<usize>,
    visit: &mut F,
) {
    let Some((positions, values)) = blocks.get(idx) else {
        visit(mu);
        return;
    };
    let mut order = values.clone();
    permute(&mut order, 0, &mut |perm| {
        for (&p, &v) in positions.iter().zip(perm) {
            mu[p - 1] = v;
        }
        fill_blocks(blocks, idx + 1, mu, visit);
    });
}

fn permute<F: FnMut(&[usize])>(items: &mut [usize], start: usize, visit: &mut F) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4() -> RandomizedBlockSpec {
        RandomizedBlockSpec {
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
        }
    }

    #[test]
    fn example4_is_valid_with_six_orderings() {
        let spec = example4();
        assert!(spec.validate().is_empty());
        assert_eq!(spec.orderings(), 6);
        let mut seen = Vec::new();
        spec.for_each_arrival(|mu| seen.push(mu.to_vec()));
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|mu| mu[..3] == [1, 3, 5]));
    }

    #[test]
    fn rejects_non_partitions() {
        let mut spec = example4();
        spec.blocks[0].values = vec![2, 4, 4];
        assert!(spec
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::ValuesNotPartition { .. })));
        spec.blocks[0].positions = vec![4, 5];
        assert!(spec
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::BlockSizeMismatch { .. })));
    }
}
