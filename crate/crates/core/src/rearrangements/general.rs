//! Fixed positions, switching schemes and jump probabilities.
//!
//! Fixed values `n_1 < .. < n_d` (indices into the descending sample) sit at
//! positions `m_1..m_d`. The values strictly between consecutive fixed values
//! form block `N_i = {n_{i-1}+1 .. n_i-1}` (with `n_0 = 0`, `n_{d+1} = n+1`),
//! and are placed at the positions `M_i`, ordered by a travellers' function
//! rescaled to the interval `[a_{n_i}, a_{n_{i-1}}]` that contains them.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::directing::{v_shape, PiecewiseLinearFn};

/// Positions and the descending-order value indices they receive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub positions: Vec<usize>,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralConstructionSpec {
    pub n: usize,
    pub fixed_values: Vec<usize>,
    pub fixed_positions: Vec<usize>,
    /// `d + 1` blocks; block `i` holds `(M_i, N_i)`.
    pub blocks: Vec<Block>,
    /// One jump probability per block, `None` exactly for empty blocks.
    pub thetas: Vec<Option<f64>>,
}

/// A broken constraint of a rearrangement spec.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroSize,
    ValueOutOfRange {
        value: usize,
    },
    PositionOutOfRange {
        position: usize,
    },
    FixedValuesNotIncreasing {
        index: usize,
    },
    GapOfTwo {
        lower: usize,
        upper: usize,
    },
    FixedCountMismatch {
        values: usize,
        positions: usize,
    },
    BlockCountMismatch {
        expected: usize,
        got: usize,
    },
    BlockValuesMismatch {
        block: usize,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    BlockSizeMismatch {
        block: usize,
        positions: usize,
        values: usize,
    },
    EmptyBlock {
        block: usize,
    },
    PositionsNotPartition {
        missing: Vec<usize>,
        repeated: Vec<usize>,
    },
    ValuesNotPartition {
        missing: Vec<usize>,
        repeated: Vec<usize>,
    },
    ThetaCountMismatch {
        expected: usize,
        got: usize,
    },
    MissingTheta {
        block: usize,
    },
    UnexpectedTheta {
        block: usize,
    },
    ThetaOutOfRange {
        block: usize,
        theta: f64,
    },
    PermutationSize {
        expected: usize,
        got: usize,
    },
    TooLarge {
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            ZeroSize => write!(f, "n must be at least 1"),
            ValueOutOfRange { value } => write!(f, "value index {value} is outside 1..=n"),
            PositionOutOfRange { position } => write!(f, "position {position} is outside 1..=n"),
            FixedValuesNotIncreasing { index } => {
                write!(f, "fixed values not strictly increasing at index {index}")
            }
            GapOfTwo { lower, upper } => write!(
                f,
                "n_{{i+1}} - n_i = 2 between fixed values {lower} and {upper} (a single intermediate value)"
            ),
            FixedCountMismatch { values, positions } => {
                write!(f, "{values} fixed values but {positions} fixed positions")
            }
            BlockCountMismatch { expected, got } => {
                write!(f, "expected {expected} blocks, got {got}")
            }
            BlockValuesMismatch { block, expected, got } => {
                write!(f, "block {block} must hold values {expected:?}, got {got:?}")
            }
            BlockSizeMismatch {
                block,
                positions,
                values,
            } => write!(f, "block {block} has {positions} positions but {values} values"),
            EmptyBlock { block } => write!(f, "block {block} is empty"),
            PositionsNotPartition { missing, repeated } => write!(
                f,
                "positions do not partition 1..=n (missing {missing:?}, repeated {repeated:?})"
            ),
            ValuesNotPartition { missing, repeated } => write!(
                f,
                "values do not partition 1..=n (missing {missing:?}, repeated {repeated:?})"
            ),
            ThetaCountMismatch { expected, got } => {
                write!(f, "expected {expected} thetas, got {got}")
            }
            MissingTheta { block } => write!(f, "block {block} is nonempty but has no theta"),
            UnexpectedTheta { block } => write!(f, "block {block} is empty but has a theta"),
            ThetaOutOfRange { block, theta } => {
                write!(f, "theta {theta} of block {block} is outside (0, 1)")
            }
            PermutationSize { expected, got } => {
                write!(f, "permutation has length {got}, expected {expected}")
            }
            TooLarge { detail } => write!(f, "{detail}"),
        }
    }
}

/// Checks that `sets` cover `1..=n` exactly once.
pub(crate) fn partition_defects<'a>(
    n: usize,
    sets: impl Iterator<Item = &'a usize>,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut count = vec![0usize; n + 1];
    for &v in sets {
        if (1..=n).contains(&v) {
            count[v] += 1;
        }
    }
    let missing: Vec<usize> = (1..=n).filter(|&v| count[v] == 0).collect();
    let repeated: Vec<usize> = (1..=n).filter(|&v| count[v] > 1).collect();
    if missing.is_empty() && repeated.is_empty() {
        None
    } else {
        Some((missing, repeated))
    }
}

/// Every violated constraint of a general construction spec. An empty list
/// means the spec is valid.
///
/// A gap of exactly two between consecutive fixed values is the same
/// condition as a singleton block, so it is reported once as
/// [`Violation::GapOfTwo`].
pub fn validate_general(spec: &GeneralConstructionSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = spec.n;
    if n == 0 {
        out.push(Violation::ZeroSize);
        return out;
    }
    let d = spec.fixed_values.len();

    for &v in &spec.fixed_values {
        if v == 0 || v > n {
            out.push(Violation::ValueOutOfRange { value: v });
        }
    }
    let mut increasing = true;
    for (i, w) in spec.fixed_values.windows(2).enumerate() {
        if w[0] >= w[1] {
            increasing = false;
            out.push(Violation::FixedValuesNotIncreasing { index: i + 2 });
        }
    }
    let mut bounds = Vec::with_capacity(d + 2);
    bounds.push(0);
    bounds.extend_from_slice(&spec.fixed_values);
    bounds.push(n + 1);
    if increasing {
        for w in bounds.windows(2) {
            if w[1] == w[0] + 2 {
                out.push(Violation::GapOfTwo {
                    lower: w[0],
                    upper: w[1],
                });
            }
        }
    }

    if spec.fixed_positions.len() != d {
        out.push(Violation::FixedCountMismatch {
            values: d,
            positions: spec.fixed_positions.len(),
        });
    }
    for &p in spec
        .fixed_positions
        .iter()
        .chain(spec.blocks.iter().flat_map(|b| b.positions.iter()))
    {
        if p == 0 || p > n {
            out.push(Violation::PositionOutOfRange { position: p });
        }
    }

    if spec.blocks.len() != d + 1 {
        out.push(Violation::BlockCountMismatch {
            expected: d + 1,
            got: spec.blocks.len(),
        });
    } else if increasing {
        for (i, block) in spec.blocks.iter().enumerate() {
            let expected: Vec<usize> = (bounds[i] + 1..bounds[i + 1]).collect();
            let mut got = block.values.clone();
            got.sort_unstable();
            if got != expected {
                out.push(Violation::BlockValuesMismatch {
                    block: i + 1,
                    expected,
                    got: block.values.clone(),
                });
            }
            if block.positions.len() != block.values.len() {
                out.push(Violation::BlockSizeMismatch {
                    block: i + 1,
                    positions: block.positions.len(),
                    values: block.values.len(),
                });
            }
        }
    }

    let all_positions = spec
        .fixed_positions
        .iter()
        .chain(spec.blocks.iter().flat_map(|b| b.positions.iter()));
    if let Some((missing, repeated)) = partition_defects(n, all_positions) {
        out.push(Violation::PositionsNotPartition { missing, repeated });
    }

    if spec.thetas.len() != spec.blocks.len() {
        out.push(Violation::ThetaCountMismatch {
            expected: spec.blocks.len(),
            got: spec.thetas.len(),
        });
    } else {
        for (i, (block, theta)) in spec.blocks.iter().zip(&spec.thetas).enumerate() {
            match (block.values.is_empty(), theta) {
                (false, None) => out.push(Violation::MissingTheta { block: i + 1 }),
                (true, Some(_)) => out.push(Violation::UnexpectedTheta { block: i + 1 }),
                (false, Some(t)) if !(*t > 0.0 && *t < 1.0) => out.push(Violation::ThetaOutOfRange {
                    block: i + 1,
                    theta: *t,
                }),
                _ => {}
            }
        }
    }
    out
}

/// Sampling data for one nonempty block, derived from a validated spec.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BlockPlan {
    /// Index into the padded descending sample of the upper endpoint `a_{n_{i-1}}`.
    pub upper: usize,
    /// Index of the lower endpoint `a_{n_i}`.
    pub lower: usize,
    pub values: Vec<usize>,
    pub positions: Vec<usize>,
    pub theta: f64,
    pub directing: PiecewiseLinearFn,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GeneralPlan {
    pub fixed: Vec<(usize, usize)>,
    pub blocks: Vec<BlockPlan>,
}

impl GeneralPlan {
    /// Assumes `validate_general(spec)` is empty.
    pub fn compile(spec: &GeneralConstructionSpec) -> Self {
        let n = spec.n;
        let mut bounds = vec![0];
        bounds.extend_from_slice(&spec.fixed_values);
        bounds.push(n + 1);
        let fixed = spec
            .fixed_positions
            .iter()
            .copied()
            .zip(spec.fixed_values.iter().copied())
            .collect();
        let blocks = spec
            .blocks
            .iter()
            .zip(&spec.thetas)
            .enumerate()
            .filter(|(_, (b, _))| !b.values.is_empty())
            .map(|(i, (b, theta))| {
                let theta = theta.expect("validated theta");
                let mut positions = b.positions.clone();
                positions.sort_unstable();
                BlockPlan {
                    upper: bounds[i],
                    lower: bounds[i + 1],
                    values: (bounds[i] + 1..bounds[i + 1]).collect(),
                    positions,
                    theta,
                    directing: v_shape(theta).expect("theta in (0, 1)"),
                }
            })
            .collect();
        GeneralPlan { fixed, blocks }
    }

    /// Fills `mu` (1-indexed values, 0-indexed storage) for the descending
    /// sample `x_desc`. Returns the offending pair on an `f`-value tie.
    pub fn arrival(&self, x_desc: &[f64], mu: &mut [usize]) -> Result<(), (usize, usize)> {
        let n = x_desc.len();
        let padded = |idx: usize| -> f64 {
            if idx == 0 {
                1.0
            } else if idx == n + 1 {
                0.0
            } else {
                x_desc[idx - 1]
            }
        };
        for &(pos, val) in &self.fixed {
            mu[pos - 1] = val;
        }
        let mut keyed: Vec<(f64, usize)> = Vec::new();
        for block in &self.blocks {
            let hi = padded(block.upper);
            let lo = padded(block.lower);
            let width = hi - lo;
            keyed.clear();
            keyed.extend(block.values.iter().map(|&v| {
                let g = ((x_desc[v - 1] - lo) / width).clamp(0.0, 1.0);
                (block.directing.eval_unchecked(g), v)
            }));
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err((w[0].1, w[1].1));
            }
            for (&pos, &(_, v)) in block.positions.iter().zip(keyed.iter()) {
                mu[pos - 1] = v;
            }
        }
        Ok(())
    }
}

/// Rank law at position `k` of a valid general construction, as `(rank,
/// probability)` pairs.
pub(crate) fn general_rank_law(spec: &GeneralConstructionSpec, k: usize) -> Vec<(usize, f64)> {
    let d = spec.fixed_values.len();
    // group index of each position: fixed positions carry their index i, block
    // positions carry the block index i (both 1-based)
    if let Some(i) = spec.fixed_positions.iter().position(|&m| m == k) {
        let m_i = spec.fixed_positions[i];
        let earlier_fixed = spec.fixed_positions[..i].iter().filter(|&&m| m < m_i).count();
        let earlier_blocks = spec.blocks[..=i]
            .iter()
            .flat_map(|b| b.positions.iter())
            .filter(|&&h| h <= m_i)
            .count();
        return vec![(1 + earlier_fixed + earlier_blocks, 1.0)];
    }
    let i = spec
        .blocks
        .iter()
        .position(|b| b.positions.contains(&k))
        .expect("validated spec covers every position");
    let theta = spec.thetas[i].expect("nonempty block has theta");
    let above_fixed = spec.fixed_positions[..i.min(d)].iter().filter(|&&m| m < k).count();
    let above_blocks = spec.blocks[..i]
        .iter()
        .flat_map(|b| b.positions.iter())
        .filter(|&&h| h < k)
        .count();
    let s = 1 + above_fixed + above_blocks;
    let r = spec.blocks[i].positions.iter().filter(|&&h| h < k).count();
    if r == 0 {
        vec![(s, 1.0)]
    } else {
        vec![(s, 1.0 - theta), (s + r, theta)]
    }
}

/// Draws a valid general construction spec on `n` points with jump
/// probabilities in `[0.1, 0.9]`.
pub fn random_general_spec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GeneralConstructionSpec {
    // rejection sampling over subsets of fixed values; every gap must differ from 2
    let gaps_ok = |fixed: &[usize]| {
        std::iter::once(0)
            .chain(fixed.iter().copied())
            .chain(std::iter::once(n + 1))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] - w[0] != 2)
    };
    let fixed_values = loop {
        let candidate: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.35)).collect();
        if gaps_ok(&candidate) {
            break candidate;
        }
    };
    let d = fixed_values.len();

    let mut positions: Vec<usize> = (1..=n).collect();
    positions.shuffle(rng);
    let fixed_positions = positions[..d].to_vec();
    let mut rest = positions[d..].iter().copied();

    let bounds: Vec<usize> = std::iter::once(0)
        .chain(fixed_values.iter().copied())
        .chain(std::iter::once(n + 1))
        .collect();
    let mut blocks = Vec::with_capacity(d + 1);
    let mut thetas = Vec::with_capacity(d + 1);
    for w in bounds.windows(2) {
        let values: Vec<usize> = (w[0] + 1..w[1]).collect();
        let block_positions: BTreeSet<usize> = rest.by_ref().take(values.len()).collect();
        thetas.push(if values.is_empty() {
            None
        } else {
            Some(0.1 + 0.8 * rng.random::<f64>())
        });
        blocks.push(Block {
            positions: block_positions.into_iter().collect(),
            values,
        });
    }
    GeneralConstructionSpec {
        n,
        fixed_values,
        fixed_positions,
        blocks,
        thetas,
    }
}
