//! Numeric evaluation with total semantics: singularities and overflow
//! produce a NaN marker that propagates to the root instead of aborting.

use super::{Expr, Primitive, MAX_ARITY};
use crate::error::{Error, Result};

impl Expr {
    /// Evaluates the tree on one data row. `Divide` by zero, `Inverse` of
    /// zero, `Sqrt` of a negative, and any non-finite intermediate all yield
    /// NaN, which every downstream operator preserves.
    pub fn eval(&self, row: &[f64]) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(i) => row.get(*i).copied().ok_or_else(|| {
                Error::input(format!(
                    "variable index {i} out of range for row of width {}",
                    row.len()
                ))
            }),
            Expr::Op(p, kids) => {
                let mut args = [0.0f64; MAX_ARITY];
                for (slot, kid) in args.iter_mut().zip(kids) {
                    *slot = kid.eval(row)?;
                }
                Ok(apply(*p, &args[..kids.len()]))
            }
        }
    }
}

fn apply(p: Primitive, args: &[f64]) -> f64 {
    let v = match p {
        Primitive::Plus => args.iter().sum(),
        Primitive::Minus => -args[0],
        Primitive::Subtract => args[0] - args[1],
        Primitive::Divide => {
            if args[1] == 0.0 {
                f64::NAN
            } else {
                args[0] / args[1]
            }
        }
        Primitive::Times => args.iter().product(),
        Primitive::Sqrt => {
            if args[0] < 0.0 {
                f64::NAN
            } else {
                args[0].sqrt()
            }
        }
        Primitive::Square => args[0] * args[0],
        Primitive::Inverse => {
            if args[0] == 0.0 {
                f64::NAN
            } else {
                1.0 / args[0]
            }
        }
    };
    // Canonicalize overflow to the same marker as domain errors.
    if v.is_finite() {
        v
    } else {
        f64::NAN
    }
}
