//! Interval-arithmetic range analysis.
//!
//! Used to screen models for pathologies over the training-data ranges:
//! division or inversion of a range containing zero, square roots of
//! partially negative ranges, and responses that blow up to non-finite
//! values. Endpoints are widened outward by one ulp after every operation
//! so the computed interval soundly encloses every floating-point value the
//! evaluator can produce within the given ranges.

use serde::{Deserialize, Serialize};

use super::{Expr, Primitive};
use crate::error::{Error, Result};

/// A closed real interval with a pathology flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Set when any subexpression divided/inverted through zero, took a
    /// square root of a partially negative range, or produced an unbounded
    /// endpoint. Once set, it absorbs all further operations.
    pub pathological: bool,
}

impl Interval {
    /// A well-formed interval `[lo, hi]`.
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval {
            lo,
            hi,
            pathological: false,
        }
    }

    /// The degenerate interval `[v, v]`.
    pub fn point(v: f64) -> Self {
        Interval::new(v, v)
    }

    /// The absorbing pathological interval.
    pub fn pathological() -> Self {
        Interval {
            lo: f64::NAN,
            hi: f64::NAN,
            pathological: true,
        }
    }

    /// Whether `v` lies within the closed interval.
    pub fn contains(&self, v: f64) -> bool {
        !self.pathological && self.lo <= v && v <= self.hi
    }

    fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    /// Widens outward by one ulp to stay sound under the evaluator's
    /// rounding; any non-finite endpoint (before or after widening) makes
    /// the result pathological.
    fn seal(self) -> Self {
        if self.pathological {
            return self;
        }
        let lo = self.lo.next_down();
        let hi = self.hi.next_up();
        if !lo.is_finite() || !hi.is_finite() {
            return Interval::pathological();
        }
        Interval {
            lo,
            hi,
            pathological: false,
        }
    }

    fn add(self, rhs: Self) -> Self {
        if self.pathological || rhs.pathological {
            return Interval::pathological();
        }
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
            pathological: false,
        }
        .seal()
    }

    fn neg(self) -> Self {
        if self.pathological {
            return Interval::pathological();
        }
        Interval::new(-self.hi, -self.lo).seal()
    }

    fn sub(self, rhs: Self) -> Self {
        if self.pathological || rhs.pathological {
            return Interval::pathological();
        }
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
            pathological: false,
        }
        .seal()
    }

    fn mul(self, rhs: Self) -> Self {
        if self.pathological || rhs.pathological {
            return Interval::pathological();
        }
        let products = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = products.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo,
            hi,
            pathological: false,
        }
        .seal()
    }

    fn div(self, rhs: Self) -> Self {
        if self.pathological || rhs.pathological || rhs.contains_zero() {
            return Interval::pathological();
        }
        let quotients = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let lo = quotients.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo,
            hi,
            pathological: false,
        }
        .seal()
    }

    fn sqrt(self) -> Self {
        if self.pathological || self.lo < 0.0 {
            return Interval::pathological();
        }
        Interval::new(self.lo.sqrt(), self.hi.sqrt()).seal()
    }

    fn square(self) -> Self {
        if self.pathological {
            return Interval::pathological();
        }
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        let interval = if self.contains_zero() {
            Interval {
                lo: 0.0,
                hi: a.max(b),
                pathological: false,
            }
        } else {
            Interval {
                lo: a.min(b),
                hi: a.max(b),
                pathological: false,
            }
        };
        interval.seal()
    }

    fn inverse(self) -> Self {
        Interval::point(1.0).div(self)
    }
}

impl Expr {
    /// Propagates per-variable ranges through the tree. The result is
    /// pathological when any subexpression can hit a singularity or an
    /// unbounded value somewhere in the supplied ranges.
    pub fn interval_eval(&self, ranges: &[Interval]) -> Result<Interval> {
        match self {
            Expr::Const(c) => Ok(Interval::point(*c)),
            Expr::Var(i) => {
                let r = ranges.get(*i).copied().ok_or_else(|| {
                    Error::input(format!(
                        "variable index {i} out of range for {} supplied ranges",
                        ranges.len()
                    ))
                })?;
                if r.pathological || !r.lo.is_finite() || !r.hi.is_finite() {
                    Ok(Interval::pathological())
                } else {
                    Ok(r)
                }
            }
            Expr::Op(p, kids) => {
                let mut args = Vec::with_capacity(kids.len());
                for k in kids {
                    args.push(k.interval_eval(ranges)?);
                }
                Ok(apply(*p, &args))
            }
        }
    }
}

fn apply(p: Primitive, args: &[Interval]) -> Interval {
    match p {
        Primitive::Plus => args[1..].iter().fold(args[0], |acc, x| acc.add(*x)),
        Primitive::Minus => args[0].neg(),
        Primitive::Subtract => args[0].sub(args[1]),
        Primitive::Divide => args[0].div(args[1]),
        Primitive::Times => args[1..].iter().fold(args[0], |acc, x| acc.mul(*x)),
        Primitive::Sqrt => args[0].sqrt(),
        Primitive::Square => args[0].square(),
        Primitive::Inverse => args[0].inverse(),
    }
}
