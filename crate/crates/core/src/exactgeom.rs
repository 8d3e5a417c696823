//! Exact geometry of the two-point case.
//!
//! For `θ ∈ (0,1)` and `c ∈ [0,1)` the sublevel set `{f_θ ≤ c}` splits `[0,1]`
//! into `I_1 < I_2 < I_3`. The descending simplex `{a_1 ≥ a_2}` then splits
//! into the atoms `X_ij = {a_1 ∈ I_i, a_2 ∈ I_j}`, `3 ≥ i ≥ j ≥ 1`, whose
//! normalized measures are exact rationals. Arrival data `id` means
//! `Y = (a_1, a_2)` and `τ` means `Y = (a_2, a_1)`; `R_2 = 2` iff the arrival
//! is `id`.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::directing::{v_shape, PiecewiseLinearFn};
use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::rankcore::Permutation;
use crate::rearrangements::{sample_trial, Kind, RearrangementSpec};
use crate::stream::{domain, run_trials, RunConfig, TrialStreams};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The partition `{I_1, I_2, I_3}` and its lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition2 {
    theta: BigRational,
    c: BigRational,
    lengths: [BigRational; 3],
    directing: PiecewiseLinearFn,
    c_f64: f64,
    theta_f64: f64,
}

impl Partition2 {
    pub fn new(theta: BigRational, c: BigRational) -> Result<Self> {
        if !(theta.is_positive() && theta < BigRational::one()) {
            return Err(Error::OutOfRange {
                what: "theta",
                detail: format!("{theta} is outside (0, 1)"),
            });
        }
        if c.is_negative() || c >= BigRational::one() {
            return Err(Error::OutOfRange {
                what: "c",
                detail: format!("{c} is outside [0, 1)"),
            });
        }
        let rest = BigRational::one() - &c;
        let lengths = [&theta * &rest, c.clone(), (BigRational::one() - &theta) * &rest];
        let theta_f64 = theta.to_f64().expect("finite rational");
        Ok(Partition2 {
            directing: v_shape(theta_f64)?,
            c_f64: c.to_f64().expect("finite rational"),
            theta_f64,
            theta,
            c,
            lengths,
        })
    }

    pub fn theta(&self) -> &BigRational {
        &self.theta
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    /// `ℓ_i`, `i ∈ 1..=3`.
    pub fn length(&self, i: usize) -> &BigRational {
        &self.lengths[i - 1]
    }

    /// `α = θ / (1 − θ)`.
    pub fn alpha(&self) -> BigRational {
        &self.theta / (BigRational::one() - &self.theta)
    }

    /// `I_1, I_2, I_3` as exact interval sets.
    pub fn intervals(&self) -> [IntervalSet<BigRational>; 3] {
        let a = self.lengths[0].clone();
        let b = &a + &self.lengths[1];
        let set = |lo: BigRational, hi: BigRational| {
            IntervalSet::interval(lo, hi).expect("partition endpoints lie in [0, 1]")
        };
        [
            set(BigRational::zero(), a.clone()),
            set(a, b.clone()),
            set(b, BigRational::one()),
        ]
    }

    /// `f_θ(x)` in floating point.
    pub fn f(&self, x: f64) -> f64 {
        self.directing.eval_unchecked(x)
    }

    /// Index of the interval containing `x`, decided through `f_θ` so that it
    /// agrees with the event `f_θ(x) ≤ c`.
    pub fn classify(&self, x: f64) -> usize {
        if self.f(x) <= self.c_f64 {
            2
        } else if x < self.theta_f64 {
            1
        } else {
            3
        }
    }

    /// Atom `(i, j)` of a descending pair.
    pub fn atom(&self, a1: f64, a2: f64) -> (usize, usize) {
        (self.classify(a1), self.classify(a2))
    }

    /// `f_θ(Y_2) ≤ c < f_θ(Y_1)`.
    pub fn is_defect(&self, y1: f64, y2: f64) -> bool {
        self.f(y2) <= self.c_f64 && self.c_f64 < self.f(y1)
    }

    pub fn measures(&self) -> AtomMeasures {
        let l = &self.lengths;
        let mut m: [[BigRational; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..=i {
                m[i][j] = if i == j { &l[i] * &l[i] } else { q(2, 1) * &l[i] * &l[j] };
            }
        }
        AtomMeasures { m }
    }
}

/// Normalized measures `m(X_ij) = 2 Leb_2(X_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomMeasures {
    m: [[BigRational; 3]; 3],
}

impl AtomMeasures {
    /// `m(X_ij)` for `3 ≥ i ≥ j ≥ 1`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.m[i - 1][j - 1]
    }

    pub fn total(&self) -> BigRational {
        ATOMS.iter().map(|&(i, j)| self.get(i, j).clone()).sum()
    }
}

/// The six atoms of positive measure.
pub const ATOMS: [(usize, usize); 6] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)];

pub fn atom_measures(theta: BigRational, c: BigRational) -> Result<AtomMeasures> {
    Ok(Partition2::new(theta, c)?.measures())
}

/// Both sides of `α⁻¹ m(X_11) + α m(X_33) = m(X_31)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaIdentity {
    #[serde(serialize_with = "ser_q")]
    pub left_first: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub left_second: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub right: BigRational,
    pub holds: bool,
}

impl AlphaIdentity {
    pub fn evaluate(partition: &Partition2) -> Self {
        let m = partition.measures();
        let alpha = partition.alpha();
        let left_first = m.get(1, 1) / &alpha;
        let left_second = m.get(3, 3) * &alpha;
        let right = m.get(3, 1).clone();
        let holds = &left_first + &left_second == right;
        AlphaIdentity {
            left_first,
            left_second,
            right,
            holds,
        }
    }
}

/// Truth of the four forms `a = θ(a+b)`, `(1−θ)a = θb`, `a = αb`,
/// `α⁻¹a = b`; `None` where a form is undefined.
pub fn ratio_forms(theta: &BigRational, a: &BigRational, b: &BigRational) -> [Option<bool>; 4] {
    let one = BigRational::one();
    let alpha = (theta != &one).then(|| theta / (&one - theta));
    let alpha_inv = theta.is_positive().then(|| (&one - theta) / theta);
    [
        Some(a == &(theta * (a + b))),
        Some((&one - theta) * a == theta * b),
        alpha.map(|al| a == &(al * b)),
        alpha_inv.map(|ai| ai * a == *b),
    ]
}

/// Exact per-atom fraction of `τ` arrivals, where the spec admits one.
fn tau_fractions(partition: &Partition2, spec: &RearrangementSpec) -> Option<[[BigRational; 3]; 3]> {
    let mut t: [[BigRational; 3]; 3] = Default::default();
    let fill = |t: &mut [[BigRational; 3]; 3], v: BigRational| {
        for &(i, j) in &ATOMS {
            t[i - 1][j - 1] = v.clone();
        }
    };
    match spec.kind() {
        Kind::Trivial => fill(&mut t, q(1, 2)),
        Kind::Constant(s) if s == &Permutation::identity(2) => fill(&mut t, BigRational::zero()),
        Kind::Constant(_) => fill(&mut t, BigRational::one()),
        Kind::Travellers(tr) if tr.theta() == partition.theta_f64 => {
            fill(&mut t, BigRational::zero());
            t[2][0] = q(1, 2);
            t[1][1] = BigRational::one() - &partition.theta;
            t[2][1] = BigRational::one();
            t[2][2] = BigRational::one();
        }
        _ => return None,
    }
    Some(t)
}

fn require_n2(spec: &RearrangementSpec) -> Result<()> {
    if spec.n() != 2 {
        return Err(Error::OutOfRange {
            what: "sample size",
            detail: format!("two-point geometry needs n = 2, got {}", spec.n()),
        });
    }
    Ok(())
}

/// A probability known exactly or estimated by simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Probability {
    Exact {
        #[serde(serialize_with = "ser_q")]
        value: BigRational,
        decimal: f64,
    },
    Estimate {
        value: f64,
        hits: u64,
        trials: u64,
    },
}

impl Probability {
    pub fn exact(value: BigRational) -> Self {
        let decimal = value.to_f64().unwrap_or(f64::NAN);
        Probability::Exact { value, decimal }
    }

    pub fn value(&self) -> f64 {
        match self {
            Probability::Exact { decimal, .. } => *decimal,
            Probability::Estimate { value, .. } => *value,
        }
    }
}

/// `P(R_2 = 2 | Y_1 ∈ I_1)` and `P(R_2 = 2 | Y_1 ∈ I_3)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct N2Conditionals {
    pub given_i1: Probability,
    pub given_i3: Probability,
}

/// Conditional rank probabilities for a two-point spec: exact when the arrival
/// rule is constant on atoms, otherwise estimated from `config.trials` trials.
pub fn n2_conditional_rank(
    partition: &Partition2,
    spec: &RearrangementSpec,
    config: &RunConfig,
) -> Result<N2Conditionals> {
    require_n2(spec)?;
    if let Some(t) = tau_fractions(partition, spec) {
        let m = partition.measures();
        let one = BigRational::one();
        let id = |i: usize, j: usize| m.get(i, j) * (&one - &t[i - 1][j - 1]);
        let tau = |i: usize, j: usize| m.get(i, j) * &t[i - 1][j - 1];
        let ratio = |num: BigRational, other: BigRational| {
            let den = &num + other;
            if den.is_zero() {
                BigRational::zero()
            } else {
                num / den
            }
        };
        let i1 = ratio(id(1, 1), tau(1, 1) + tau(2, 1) + tau(3, 1));
        let i3 = ratio(id(3, 1) + id(3, 2) + id(3, 3), tau(3, 3));
        return Ok(N2Conditionals {
            given_i1: Probability::exact(i1),
            given_i3: Probability::exact(i3),
        });
    }
    let [c1, c3] = conditional_counts(spec, config, |y1| match partition.classify(y1) {
        1 => Some(0),
        3 => Some(1),
        _ => None,
    })?;
    let est = |(hits, trials): (u64, u64)| Probability::Estimate {
        value: if trials == 0 {
            f64::NAN
        } else {
            hits as f64 / trials as f64
        },
        hits,
        trials,
    };
    Ok(N2Conditionals {
        given_i1: est(c1),
        given_i3: est(c3),
    })
}

/// Empirical `P(R_2 = 2 | Y_1 ∈ [lo, hi])` as `(hits, conditioning trials)`.
pub fn n2_empirical_conditional(spec: &RearrangementSpec, lo: f64, hi: f64, config: &RunConfig) -> Result<(u64, u64)> {
    require_n2(spec)?;
    let [c] = conditional_counts(spec, config, |y1| ((lo..=hi).contains(&y1)).then_some(0))?;
    Ok(c)
}

fn conditional_counts<const K: usize, F>(
    spec: &RearrangementSpec,
    config: &RunConfig,
    cell: F,
) -> Result<[(u64, u64); K]>
where
    F: Fn(f64) -> Option<usize> + Sync,
{
    let streams = TrialStreams::new(config.seed, domain::EXACT_GEOM);
    run_trials(
        &streams,
        config.trials,
        config.workers,
        || [(0u64, 0u64); K],
        |acc, _, rng| {
            let rec = sample_trial(spec, rng)?;
            if let Some(k) = cell(rec.y[0]) {
                acc[k].1 += 1;
                if rec.ranks.get(2) == 2 {
                    acc[k].0 += 1;
                }
            }
            Ok(())
        },
        |acc, part| {
            for (a, p) in acc.iter_mut().zip(part) {
                a.0 += p.0;
                a.1 += p.1;
            }
        },
    )
}

/// Arrival data of a two-point region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrival {
    Id,
    Tau,
}

/// An atom paired with an arrival order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub atom: (usize, usize),
    pub arrival: Arrival,
}

/// The defect event `{f_θ(Y_2) ≤ c < f_θ(Y_1)}` is `X_32 × {id} ∪ X_21 × {τ}`.
pub const DEFECT_REGIONS: [Region; 2] = [
    Region {
        atom: (3, 2),
        arrival: Arrival::Id,
    },
    Region {
        atom: (2, 1),
        arrival: Arrival::Tau,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub regions: Vec<Region>,
    /// Exact probability of the event when the spec admits one.
    pub exact: Option<Probability>,
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    /// Trials in the event whose `(atom, arrival)` lies outside the regions.
    pub region_mismatches: u64,
}

/// Simulates a two-point spec and counts the defect event, checking every
/// hit against the region decomposition.
pub fn defect_probability(
    partition: &Partition2,
    spec: &RearrangementSpec,
    config: &RunConfig,
) -> Result<DefectReport> {
    require_n2(spec)?;
    let exact = tau_fractions(partition, spec).map(|t| {
        let m = partition.measures();
        Probability::exact(m.get(3, 2) * (BigRational::one() - &t[2][1]) + m.get(2, 1) * &t[1][0])
    });
    let streams = TrialStreams::new(config.seed, domain::EXACT_GEOM);
    let (hits, region_mismatches) = run_trials(
        &streams,
        config.trials,
        config.workers,
        || (0u64, 0u64),
        |acc, _, rng| {
            let rec = sample_trial(spec, rng)?;
            if partition.is_defect(rec.y[0], rec.y[1]) {
                acc.0 += 1;
                let region = Region {
                    atom: partition.atom(rec.x_desc[0], rec.x_desc[1]),
                    arrival: if rec.mu.get(1) == 1 { Arrival::Id } else { Arrival::Tau },
                };
                if !DEFECT_REGIONS.contains(&region) {
                    acc.1 += 1;
                }
            }
            Ok(())
        },
        |acc, part| {
            acc.0 += part.0;
            acc.1 += part.1;
        },
    )?;
    Ok(DefectReport {
        regions: DEFECT_REGIONS.to_vec(),
        exact,
        hits,
        trials: config.trials,
        frequency: if config.trials == 0 {
            0.0
        } else {
            hits as f64 / config.trials as f64
        },
        region_mismatches,
    })
}

/// Defect frequency of the travellers' process with the partition's own `θ`.
pub fn travellers_defect_probability(partition: &Partition2, config: &RunConfig) -> Result<DefectReport> {
    let spec = RearrangementSpec::travellers(2, partition.theta_f64)?;
    defect_probability(partition, &spec, config)
}

/// Everything the two-point geometry determines exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exact2Report {
    #[serde(serialize_with = "ser_q")]
    pub theta: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub c: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub alpha: BigRational,
    #[serde(serialize_with = "ser_qs")]
    pub lengths: Vec<BigRational>,
    pub atoms: Vec<AtomEntry>,
    pub identity: AlphaIdentity,
    pub travellers: N2Conditionals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomEntry {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "ser_q")]
    pub measure: BigRational,
}

pub fn exact2_report(theta: BigRational, c: BigRational) -> Result<Exact2Report> {
    let p = Partition2::new(theta, c)?;
    let m = p.measures();
    let spec = RearrangementSpec::travellers(2, p.theta_f64)?;
    Ok(Exact2Report {
        theta: p.theta.clone(),
        c: p.c.clone(),
        alpha: p.alpha(),
        lengths: p.lengths.to_vec(),
        atoms: ATOMS
            .iter()
            .map(|&(i, j)| AtomEntry {
                i,
                j,
                measure: m.get(i, j).clone(),
            })
            .collect(),
        identity: AlphaIdentity::evaluate(&p),
        travellers: n2_conditional_rank(&p, &spec, &RunConfig::new(0, 0))?,
    })
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::OutOfRange {
        what: "rational",
        detail: format!("cannot parse {text:?}"),
    };
    let text = text.trim();
    if let Ok(r) = text.parse::<BigRational>() {
        return Ok(r);
    }
    let (int, frac) = text.split_once('.').ok_or_else(bad)?;
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let negative = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
    let numer: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(numer, denom);
    Ok(if negative { -r } else { r })
}

fn ser_q<S: serde::Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_qs<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}
