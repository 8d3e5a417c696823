use thiserror::Error;

use crate::rearrangements::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tied values at positions {first} and {second}")]
    Tie { first: usize, second: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid rank tuple: {0}")]
    InvalidRankTuple(String),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("singular directing function: piece {piece} is constant")]
    SingularPiece { piece: usize },

    #[error("invalid rearrangement spec: {}", join_violations(.0))]
    InvalidSpec(Vec<Violation>),

    #[error("no closed-form rank law for {0} rearrangements")]
    NoClosedForm(&'static str),

    #[error("support set has zero measure")]
    ZeroMeasure,

    #[error("invalid interval set: {0}")]
    InvalidIntervals(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("counts sum to {got}, expected {expected}")]
    CountMismatch { expected: usize, got: usize },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionCap { attempts: u64 },

    #[error("underpowered test at k = {k}: {trials} trials, need at least {required}")]
    Underpowered { k: usize, trials: u64, required: u64 },

    #[error("enumeration too large: {0} block orderings")]
    EnumerationTooLarge(u128),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn join_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
