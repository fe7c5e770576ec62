//! Scalar functions of one real variable: closed form or sampled.

use std::fmt;

use crate::expr::{Expr, ExprError};
use crate::interp::PeriodicSamples;

#[derive(Debug, Clone)]
pub enum ScalarFn {
    /// Expression in a single variable.
    Expr(Expr),
    /// Periodic grid with cubic interpolation.
    Sampled(PeriodicSamples),
}

impl ScalarFn {
    pub fn expr(e: Expr) -> Self {
        assert!(e.vars().len() <= 1, "scalar function must have at most one variable");
        ScalarFn::Expr(e)
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn::Expr(Expr::constant(c, &["s"]))
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        match self {
            ScalarFn::Expr(e) if e.vars().is_empty() => e.eval(&[]),
            ScalarFn::Expr(e) => e.eval(&[x]),
            ScalarFn::Sampled(p) => Ok(p.eval(x)),
        }
    }

    /// Evaluation that maps domain errors to NaN, for hot loops that check
    /// finiteness downstream.
    #[inline]
    pub fn eval_or_nan(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }

    pub fn derivative(&self) -> ScalarFn {
        match self {
            ScalarFn::Expr(e) if e.vars().is_empty() => ScalarFn::Expr(Expr::constant(0.0, &[])),
            ScalarFn::Expr(e) => ScalarFn::Expr(e.derivative(0)),
            ScalarFn::Sampled(p) => ScalarFn::Sampled(PeriodicSamples::from_fn(p.period(), p.len(), |x| p.eval_deriv(x))),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            ScalarFn::Expr(e) => Some(e),
            ScalarFn::Sampled(_) => None,
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, ScalarFn::Sampled(_))
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Expr(e) => write!(f, "{e}"),
            ScalarFn::Sampled(p) => write!(f, "<sampled: {} points, period {}>", p.len(), p.period()),
        }
    }
}
