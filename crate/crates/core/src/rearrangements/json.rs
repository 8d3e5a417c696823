//! JSON wire format of [`RearrangementSpec`].
//!
//! ```json
//! {"n": 3, "kind": "travellers", "theta": 0.5}
//! {"n": 3, "kind": "constant", "permutation": [3, 1, 2]}
//! {"n": 3, "kind": "binary", "function": {"breakpoints": [0, 1], "values": [0, 1]}}
//! {"n": 5, "kind": "general", "fixed_values": [3], "fixed_positions": [3],
//!  "blocks": [{"positions": [4, 5], "values": [1, 2]}, {"positions": [1, 2], "values": [4, 5]}],
//!  "thetas": [0.6, 0.3]}
//! {"n": 6, "kind": "randomized_block", "fixed": [{"position": 1, "value": 1}],
//!  "blocks": [{"positions": [2, 3, 4, 5, 6], "values": [2, 3, 4, 5, 6]}]}
//! ```

use serde::{Deserialize, Serialize};

use super::{Block, FixedPair, GeneralConstructionSpec, Kind, RandomizedBlockSpec, RearrangementSpec, Violation};
use crate::directing::PiecewiseLinearFn;
use crate::error::Error;
use crate::rankcore::Permutation;

#[derive(Serialize, Deserialize)]
pub(super) struct RawSpec {
    n: usize,
    #[serde(flatten)]
    kind: RawKind,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawKind {
    Trivial,
    Constant {
        permutation: Vec<usize>,
    },
    Travellers {
        theta: f64,
    },
    Binary {
        function: PiecewiseLinearFn,
    },
    General {
        fixed_values: Vec<usize>,
        fixed_positions: Vec<usize>,
        blocks: Vec<Block>,
        thetas: Vec<Option<f64>>,
    },
    RandomizedBlock {
        fixed: Vec<FixedPair>,
        blocks: Vec<Block>,
    },
}

impl TryFrom<RawSpec> for RearrangementSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self, Error> {
        let n = raw.n;
        match raw.kind {
            RawKind::Trivial => RearrangementSpec::trivial(n),
            RawKind::Constant { permutation } => {
                if permutation.len() != n {
                    return Err(Error::InvalidSpec(vec![Violation::PermutationSize {
                        expected: n,
                        got: permutation.len(),
                    }]));
                }
                Ok(RearrangementSpec::constant(Permutation::new(permutation)?))
            }
            RawKind::Travellers { theta } => RearrangementSpec::travellers(n, theta),
            RawKind::Binary { function } => RearrangementSpec::binary(n, function),
            RawKind::General {
                fixed_values,
                fixed_positions,
                blocks,
                thetas,
            } => RearrangementSpec::general(GeneralConstructionSpec {
                n,
                fixed_values,
                fixed_positions,
                blocks,
                thetas,
            }),
            RawKind::RandomizedBlock { fixed, blocks } => {
                RearrangementSpec::randomized_block(RandomizedBlockSpec { n, fixed, blocks })
            }
        }
    }
}

impl From<RearrangementSpec> for RawSpec {
    fn from(spec: RearrangementSpec) -> Self {
        let n = spec.n;
        let kind = match spec.kind {
            Kind::Trivial => RawKind::Trivial,
            Kind::Constant(s) => RawKind::Constant { permutation: s.into() },
            Kind::Travellers(t) => RawKind::Travellers { theta: t.theta() },
            Kind::Binary(b) => RawKind::Binary { function: b.function },
            Kind::General(g) => RawKind::General {
                fixed_values: g.spec.fixed_values,
                fixed_positions: g.spec.fixed_positions,
                blocks: g.spec.blocks,
                thetas: g.spec.thetas,
            },
            Kind::RandomizedBlock(b) => RawKind::RandomizedBlock {
                fixed: b.fixed,
                blocks: b.blocks,
            },
        };
        RawSpec { n, kind }
    }
}
