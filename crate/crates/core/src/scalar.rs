//! Numeric scalar abstraction shared by floating-point and exact rational code.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// Ordered field elements used by piecewise-linear functions and interval
/// sets. Implemented for `f64` and for arbitrary-precision rationals.
pub trait Scalar: Clone + PartialOrd + Num + Signed + Debug + ToPrimitive {
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }
}

/// Shorthand for building an exact rational.
pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::from_ratio(numer, denom)
}

pub(crate) fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub(crate) fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}
