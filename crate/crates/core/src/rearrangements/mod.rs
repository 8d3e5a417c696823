//! Rearrangement constructions.
//!
//! Every rearrangement is described through its *value data* (the sample
//! sorted into descending order, `x_desc`) and its *arrival data* (a
//! permutation `mu` with `y_k = x_desc[mu_k]`).

mod block;
mod general;
mod json;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use block::{FixedPair, RandomizedBlockSpec, MAX_ENUMERATION};
pub use general::{random_general_spec, validate_general, Block, GeneralConstructionSpec, Violation};

use crate::directing::{v_shape, PiecewiseLinearFn, VShapeParams};
use crate::error::{Error, Result};
use crate::rankcore::{descending_permutation, initial_ranks_unchecked, Permutation, RankTuple};
use crate::stream::{domain, run_trials, RunConfig, TrialStreams};
use general::{general_rank_law, GeneralPlan};

/// Law of a single initial rank: rank → probability, zero entries omitted.
pub type RankLaw = BTreeMap<usize, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Travellers {
    params: VShapeParams,
    directing: PiecewiseLinearFn,
}

impl Travellers {
    pub fn theta(&self) -> f64 {
        self.params.theta()
    }

    pub fn directing(&self) -> &PiecewiseLinearFn {
        &self.directing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binary {
    function: PiecewiseLinearFn,
    canonical: PiecewiseLinearFn,
}

impl Binary {
    pub fn function(&self) -> &PiecewiseLinearFn {
        &self.function
    }

    pub fn canonical(&self) -> &PiecewiseLinearFn {
        &self.canonical
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct General {
    spec: GeneralConstructionSpec,
    plan: GeneralPlan,
}

impl General {
    pub fn spec(&self) -> &GeneralConstructionSpec {
        &self.spec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// Arrival order uniform on `S_n`, independent of the values.
    Trivial,
    Constant(Permutation),
    Travellers(Travellers),
    Binary(Binary),
    General(General),
    RandomizedBlock(RandomizedBlockSpec),
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Trivial => "trivial",
            Kind::Constant(_) => "constant",
            Kind::Travellers(_) => "travellers",
            Kind::Binary(_) => "binary",
            Kind::General(_) => "general",
            Kind::RandomizedBlock(_) => "randomized_block",
        }
    }
}

/// A validated rearrangement of `n` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "json::RawSpec", into = "json::RawSpec")]
pub struct RearrangementSpec {
    n: usize,
    kind: Kind,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidSpec(vec![Violation::ZeroSize]))
    } else {
        Ok(())
    }
}

impl RearrangementSpec {
    pub fn trivial(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(RearrangementSpec { n, kind: Kind::Trivial })
    }

    pub fn constant(permutation: Permutation) -> Self {
        RearrangementSpec {
            n: permutation.len(),
            kind: Kind::Constant(permutation),
        }
    }

    pub fn travellers(n: usize, theta: f64) -> Result<Self> {
        check_n(n)?;
        let params = VShapeParams::new(theta)?;
        Ok(RearrangementSpec {
            n,
            kind: Kind::Travellers(Travellers {
                params,
                directing: v_shape(theta)?,
            }),
        })
    }

    /// A binary rearrangement ordering points by the canonical form of `f`.
    pub fn binary(n: usize, function: PiecewiseLinearFn) -> Result<Self> {
        check_n(n)?;
        let canonical = function.canonicalize();
        Ok(RearrangementSpec {
            n,
            kind: Kind::Binary(Binary { function, canonical }),
        })
    }

    pub fn general(spec: GeneralConstructionSpec) -> Result<Self> {
        let violations = validate_general(&spec);
        if !violations.is_empty() {
            return Err(Error::InvalidSpec(violations));
        }
        let plan = GeneralPlan::compile(&spec);
        Ok(RearrangementSpec {
            n: spec.n,
            kind: Kind::General(General { spec, plan }),
        })
    }

    pub fn randomized_block(spec: RandomizedBlockSpec) -> Result<Self> {
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidSpec(violations));
        }
        Ok(RearrangementSpec {
            n: spec.n,
            kind: Kind::RandomizedBlock(spec),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.kind, Kind::Binary(_))
    }
}

/// One sampled trial: value data, arrival data, the rearranged sample and its
/// initial ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub x_desc: Vec<f64>,
    pub mu: Permutation,
    pub y: Vec<f64>,
    pub ranks: RankTuple,
    /// Travellers' only: `J_k = 1` iff `y_k >= θ`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jump_indicators: Option<Vec<bool>>,
}

/// `n` independent uniforms on `[0, 1)`.
pub fn sample_iud<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn sort_by_key(x_desc: &[f64], f: &PiecewiseLinearFn, mu: &mut [usize]) -> Result<()> {
    let mut keyed: Vec<(f64, usize)> = x_desc
        .iter()
        .enumerate()
        .map(|(i, &x)| (f.eval_unchecked(x), i + 1))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Tie {
            first: w[0].1.min(w[1].1),
            second: w[0].1.max(w[1].1),
        });
    }
    for (slot, (_, i)) in mu.iter_mut().zip(keyed) {
        *slot = i;
    }
    Ok(())
}

fn check_unit(x: &[f64]) -> Result<()> {
    match x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::OutOfRange {
            what: "sample value",
            detail: format!("{v} is outside [0, 1]"),
        }),
        None => Ok(()),
    }
}

/// Rearranges the sample `x` according to `spec`.
///
/// `rng` is consumed only by the kinds whose arrival order is random
/// (trivial and randomized-block).
pub fn apply<R: Rng + ?Sized>(spec: &RearrangementSpec, x: &[f64], rng: &mut R) -> Result<TrialRecord> {
    let n = spec.n;
    if x.len() != n {
        return Err(Error::OutOfRange {
            what: "sample length",
            detail: format!("got {} values for n = {n}", x.len()),
        });
    }
    let (x_desc, _) = descending_permutation(x)?;
    let mut mu = vec![0usize; n];
    match &spec.kind {
        Kind::Trivial => {
            for (i, slot) in mu.iter_mut().enumerate() {
                *slot = i + 1;
            }
            mu.shuffle(rng);
        }
        Kind::Constant(s) => mu.copy_from_slice(s.images()),
        Kind::Travellers(t) => {
            check_unit(x)?;
            sort_by_key(&x_desc, &t.directing, &mut mu)?;
        }
        Kind::Binary(b) => {
            check_unit(x)?;
            sort_by_key(&x_desc, &b.canonical, &mut mu)?;
        }
        Kind::General(g) => {
            check_unit(x)?;
            g.plan.arrival(&x_desc, &mut mu).map_err(|(a, b)| Error::Tie {
                first: a.min(b),
                second: a.max(b),
            })?;
        }
        Kind::RandomizedBlock(b) => b.arrival(rng, &mut mu),
    }
    let y: Vec<f64> = mu.iter().map(|&i| x_desc[i - 1]).collect();
    let ranks = initial_ranks_unchecked(&y);
    let jump_indicators = match &spec.kind {
        Kind::Travellers(t) => Some(y.iter().map(|&v| v >= t.theta()).collect()),
        _ => None,
    };
    Ok(TrialRecord {
        x_desc,
        mu: Permutation::new(mu).expect("arrival data is a permutation"),
        y,
        ranks,
        jump_indicators,
    })
}

/// Samples a fresh i.u.d. input and rearranges it, all from one stream.
pub fn sample_trial<R: Rng + ?Sized>(spec: &RearrangementSpec, rng: &mut R) -> Result<TrialRecord> {
    let x = sample_iud(spec.n, rng);
    apply(spec, &x, rng)
}

/// Runs `config.trials` independent trials and returns them in trial order.
pub fn simulate(spec: &RearrangementSpec, config: &RunConfig) -> Result<Vec<TrialRecord>> {
    let streams = TrialStreams::new(config.seed, domain::REARRANGE);
    run_trials(
        &streams,
        config.trials,
        config.workers,
        Vec::new,
        |acc: &mut Vec<TrialRecord>, _, rng| {
            acc.push(sample_trial(spec, rng)?);
            Ok(())
        },
        |acc, part| acc.extend(part),
    )
}

/// Empirical joint counts `counts[k-1][l-1] = #{trials : R_k = l}`.
pub fn rank_counts(spec: &RearrangementSpec, config: &RunConfig) -> Result<Vec<Vec<u64>>> {
    let n = spec.n;
    let streams = TrialStreams::new(config.seed, domain::REARRANGE);
    run_trials(
        &streams,
        config.trials,
        config.workers,
        || (1..=n).map(|k| vec![0u64; k]).collect::<Vec<_>>(),
        |acc, _, rng| {
            let rec = sample_trial(spec, rng)?;
            for (k, &r) in rec.ranks.ranks().iter().enumerate() {
                acc[k][r - 1] += 1;
            }
            Ok(())
        },
        |acc, part| {
            for (a, p) in acc.iter_mut().zip(part) {
                for (x, y) in a.iter_mut().zip(p) {
                    *x += y;
                }
            }
        },
    )
}

/// Closed-form law of the initial rank `R_k`.
pub fn predicted_rank_distribution(spec: &RearrangementSpec, k: usize) -> Result<RankLaw> {
    if k == 0 || k > spec.n {
        return Err(Error::OutOfRange {
            what: "rank index",
            detail: format!("k = {k} is outside 1..={}", spec.n),
        });
    }
    let mut law = RankLaw::new();
    let mut add = |rank: usize, p: f64| {
        if p > 0.0 {
            *law.entry(rank).or_insert(0.0) += p;
        }
    };
    match &spec.kind {
        Kind::Trivial => return Err(Error::NoClosedForm("trivial")),
        Kind::Binary(_) => return Err(Error::NoClosedForm("binary")),
        Kind::Constant(s) => add(diagonal_rank(s.images(), k), 1.0),
        Kind::Travellers(t) => {
            if k == 1 {
                add(1, 1.0);
            } else {
                add(1, 1.0 - t.theta());
                add(k, t.theta());
            }
        }
        Kind::General(g) => {
            for (rank, p) in general_rank_law(&g.spec, k) {
                add(rank, p);
            }
        }
        Kind::RandomizedBlock(b) => {
            let mut counts: BTreeMap<usize, u128> = BTreeMap::new();
            b.for_each_arrival(|mu| *counts.entry(diagonal_rank(mu, k)).or_insert(0) += 1);
            let total = b.orderings() as f64;
            for (rank, c) in counts {
                add(rank, c as f64 / total);
            }
        }
    }
    Ok(law)
}

/// `rho_{k,k}(mu) = 1 + #{i < k : mu_i < mu_k}`.
fn diagonal_rank(mu: &[usize], k: usize) -> usize {
    1 + mu[..k - 1].iter().filter(|&&v| v < mu[k - 1]).count()
}
