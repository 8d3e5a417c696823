//! Finite unions of disjoint intervals inside `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Sorted, pairwise-disjoint intervals of positive length. Endpoints are
/// treated as closed; shared endpoints between members are merged away, so
/// boundary conventions only ever affect null sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet<T = f64> {
    intervals: Vec<(T, T)>,
}

impl<T: Scalar> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    pub fn unit() -> Self {
        IntervalSet {
            intervals: vec![(T::zero(), T::one())],
        }
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    /// Builds a set from intervals inside `[0, 1]`. Overlapping or touching
    /// members are merged; zero-length members are dropped.
    pub fn new(intervals: Vec<(T, T)>) -> Result<Self> {
        for (lo, hi) in &intervals {
            if lo > hi || *lo < T::zero() || *hi > T::one() {
                return Err(Error::InvalidIntervals(format!(
                    "[{lo:?}, {hi:?}] is not a subinterval of [0, 1]"
                )));
            }
        }
        Ok(Self::from_unsorted(intervals))
    }

    pub(crate) fn from_unsorted(mut intervals: Vec<(T, T)>) -> Self {
        intervals.retain(|(lo, hi)| lo < hi);
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable endpoints"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = max_of(&last.1, &hi),
                _ => merged.push((lo, hi)),
            }
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn length(&self) -> T {
        self.intervals
            .iter()
            .fold(T::zero(), |acc, (lo, hi)| acc + hi.clone() - lo.clone())
    }

    pub fn contains(&self, x: &T) -> bool {
        self.intervals.iter().any(|(lo, hi)| lo <= x && x <= hi)
    }

    pub fn intersect(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        let mut out = Vec::new();
        for (a_lo, a_hi) in &self.intervals {
            for (b_lo, b_hi) in &other.intervals {
                let lo = max_of(a_lo, b_lo);
                let hi = min_of(a_hi, b_hi);
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        Self::from_unsorted(out)
    }

    pub fn union(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        Self::from_unsorted(all)
    }

    /// Closure of `[0, 1] \ self`.
    pub fn complement(&self) -> IntervalSet<T> {
        let mut out = Vec::new();
        let mut cursor = T::zero();
        for (lo, hi) in &self.intervals {
            if cursor < *lo {
                out.push((cursor.clone(), lo.clone()));
            }
            cursor = hi.clone();
        }
        if cursor < T::one() {
            out.push((cursor, T::one()));
        }
        IntervalSet { intervals: out }
    }

    /// Measure of the symmetric difference.
    pub fn symmetric_difference_length(&self, other: &IntervalSet<T>) -> T {
        let both = self.intersect(other).length();
        self.length() + other.length() - both.clone() - both
    }
}

impl IntervalSet<f64> {
    /// Maps `u` in `[0, length)` to the point at that cumulative length.
    pub fn point_at(&self, u: f64) -> f64 {
        let mut remaining = u;
        for &(lo, hi) in &self.intervals {
            let len = hi - lo;
            if remaining < len {
                return lo + remaining;
            }
            remaining -= len;
        }
        self.intervals.last().map_or(0.0, |&(_, hi)| hi)
    }
}

impl<'de> Deserialize<'de> for IntervalSet<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            intervals: Vec<(f64, f64)>,
        }
        let raw = Raw::deserialize(d)?;
        IntervalSet::new(raw.intervals).map_err(serde::de::Error::custom)
    }
}
