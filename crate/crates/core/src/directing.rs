//! Piecewise-linear directing functions on `[0, 1]`.
//!
//! A directing function `f` orders sample points by their `f`-values. Its
//! sublevel sets `B_t = {u : f(u) <= t}` form the filtration used by binary
//! rearrangements, and `F(t) = Leb(B_t)` is its distribution function. The
//! canonical representative `F∘f` induces the same ordering almost surely and
//! preserves Lebesgue measure.
//!
//! Values at piece boundaries follow the half-open convention `[a, b)` with
//! the last piece closed; this only matters on a null set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::scalar::{max_of, min_of, Scalar};

/// A continuous piecewise-linear function given by its values at strictly
/// increasing breakpoints `0 = b_0 < .. < b_m = 1`. No piece is constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearFn<T = f64> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

/// Parameter of the V-shaped travellers' function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VShapeParams {
    theta: f64,
}

impl VShapeParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::OutOfRange {
                what: "theta",
                detail: format!("{theta} is outside [0, 1]"),
            });
        }
        Ok(VShapeParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// The V-shaped function: `(θ - x)/θ` on `[0, θ]` and `(x - θ)/(1 - θ)` on
/// `[θ, 1]`. For `θ = 0` this is `x`; for `θ = 1` it is `1 - x`.
pub fn v_shape<T: Scalar>(theta: T) -> Result<PiecewiseLinearFn<T>> {
    if theta < T::zero() || theta > T::one() {
        return Err(Error::OutOfRange {
            what: "theta",
            detail: format!("{theta:?} is outside [0, 1]"),
        });
    }
    let (zero, one) = (T::zero(), T::one());
    if theta == zero {
        PiecewiseLinearFn::new(vec![zero.clone(), one.clone()], vec![zero, one])
    } else if theta == one {
        PiecewiseLinearFn::new(vec![zero.clone(), one.clone()], vec![one, zero])
    } else {
        PiecewiseLinearFn::new(vec![zero.clone(), theta, one.clone()], vec![one.clone(), zero, one])
    }
}

impl<T: Scalar> PiecewiseLinearFn<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidFunction("need at least two breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != T::zero() || breakpoints[breakpoints.len() - 1] != T::one() {
            return Err(Error::InvalidFunction(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if let Some(i) = breakpoints
            .windows(2)
            .position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidFunction(format!(
                "breakpoints not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::SingularPiece { piece: i });
        }
        Ok(PiecewiseLinearFn { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(self.values[0].clone(), |m, v| min_of(&m, v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(self.values[0].clone(), |m, v| max_of(&m, v))
    }

    fn piece_of(&self, x: &T) -> usize {
        // last breakpoint index <= x, clamped into a valid piece
        let idx = self.breakpoints.partition_point(|b| b <= x);
        idx.saturating_sub(1).min(self.pieces() - 1)
    }

    fn interpolate(&self, piece: usize, x: &T) -> T {
        let (b0, b1) = (&self.breakpoints[piece], &self.breakpoints[piece + 1]);
        let (v0, v1) = (&self.values[piece], &self.values[piece + 1]);
        if x == b0 {
            return v0.clone();
        }
        if x == b1 {
            return v1.clone();
        }
        v0.clone() + (v1.clone() - v0.clone()) * (x.clone() - b0.clone()) / (b1.clone() - b0.clone())
    }

    pub fn evaluate(&self, x: &T) -> Result<T> {
        if *x < T::zero() || *x > T::one() {
            return Err(Error::OutOfRange {
                what: "argument",
                detail: format!("{x:?} is outside [0, 1]"),
            });
        }
        Ok(self.interpolate(self.piece_of(x), x))
    }

    /// Sublevel subinterval of one piece, `None` if empty or a single point.
    fn piece_sublevel(&self, piece: usize, t: &T) -> Option<(T, T)> {
        let (b0, b1) = (&self.breakpoints[piece], &self.breakpoints[piece + 1]);
        let (v0, v1) = (&self.values[piece], &self.values[piece + 1]);
        let lo = min_of(v0, v1);
        let hi = max_of(v0, v1);
        if *t <= lo {
            return None;
        }
        if *t >= hi {
            return Some((b0.clone(), b1.clone()));
        }
        // preimage of t on this piece
        let cut = b0.clone() + (t.clone() - v0.clone()) * (b1.clone() - b0.clone()) / (v1.clone() - v0.clone());
        if v0 < v1 {
            Some((b0.clone(), cut))
        } else {
            Some((cut, b1.clone()))
        }
    }

    /// `F(t) = Leb{u : f(u) <= t}`, summed exactly over pieces.
    pub fn distribution_function(&self, t: &T) -> T {
        if *t >= self.max_value() {
            return T::one();
        }
        if *t <= self.min_value() {
            return T::zero();
        }
        (0..self.pieces())
            .filter_map(|p| self.piece_sublevel(p, t))
            .fold(T::zero(), |acc, (lo, hi)| acc + hi - lo)
    }

    /// The sublevel set `B_t` as a union of disjoint intervals.
    pub fn filtration_set(&self, t: &T) -> IntervalSet<T> {
        IntervalSet::from_unsorted((0..self.pieces()).filter_map(|p| self.piece_sublevel(p, t)).collect())
    }

    /// The measure-preserving representative `u ↦ Leb{v : f(v) < f(u)}`.
    ///
    /// `F` is piecewise linear in `t` with kinks only at the breakpoint values
    /// of `f`, so `F∘f` is piecewise linear with breakpoints at the original
    /// breakpoints plus the preimages of those values inside each piece.
    pub fn canonicalize(&self) -> PiecewiseLinearFn<T> {
        let mut knots = self.values.clone();
        knots.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
        knots.dedup();

        let mut points: Vec<(T, T)> = Vec::new();
        for p in 0..self.pieces() {
            let (b0, b1) = (&self.breakpoints[p], &self.breakpoints[p + 1]);
            let (v0, v1) = (&self.values[p], &self.values[p + 1]);
            let lo = min_of(v0, v1);
            let hi = max_of(v0, v1);
            let mut interior: Vec<(T, T)> = knots
                .iter()
                .filter(|t| lo < **t && **t < hi)
                .map(|t| {
                    let u =
                        b0.clone() + (t.clone() - v0.clone()) * (b1.clone() - b0.clone()) / (v1.clone() - v0.clone());
                    (u, self.distribution_function(t))
                })
                .collect();
            interior.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable points"));
            if p == 0 {
                points.push((b0.clone(), self.distribution_function(v0)));
            }
            points.extend(interior);
            points.push((b1.clone(), self.distribution_function(v1)));
        }

        // drop duplicate abscissae and exactly collinear interior points
        let mut simplified: Vec<(T, T)> = Vec::with_capacity(points.len());
        for pt in points {
            if let Some(last) = simplified.last() {
                if last.0 >= pt.0 {
                    continue;
                }
            }
            if simplified.len() >= 2 {
                let (x0, y0) = &simplified[simplified.len() - 2];
                let (x1, y1) = &simplified[simplified.len() - 1];
                let lhs = (y1.clone() - y0.clone()) * (pt.0.clone() - x1.clone());
                let rhs = (pt.1.clone() - y1.clone()) * (x1.clone() - x0.clone());
                if lhs == rhs {
                    simplified.pop();
                }
            }
            simplified.push(pt);
        }
        let (breakpoints, values) = simplified.into_iter().unzip();
        PiecewiseLinearFn { breakpoints, values }
    }
}

impl PiecewiseLinearFn<f64> {
    /// Evaluation without the range check, for hot sampling loops where the
    /// argument is known to lie in `[0, 1]`.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        self.interpolate(self.piece_of(&x), &x)
    }
}

impl<'de> Deserialize<'de> for PiecewiseLinearFn<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            breakpoints: Vec<f64>,
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        PiecewiseLinearFn::new(raw.breakpoints, raw.values).map_err(serde::de::Error::custom)
    }
}
