//! Unit-mass particle in a planar central gravity field, constrained by
//! feedback to the unit circle centred at `b`.
//!
//! `P(q) = −k/‖q − a‖`, control force along `B(q) = R_θ q`, annihilator
//! `B⊥ = Bᵀ J` with `J = [[0, 1], [−1, 0]]`, `σ(s) = b + (cos s, sin s)`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use super::{FullModel, FullModelParts, ReductionError, Topology, ValidationOptions};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleParams {
    /// Centre of the gravity field.
    pub a: [f64; 2],
    /// Centre of the constraint circle, `‖b‖ < 1`.
    pub b: [f64; 2],
    /// Angle between the control force and the radial direction.
    pub theta: f64,
    /// Gravity strength `k` in `P = −k/‖q − a‖`.
    pub k: f64,
}

impl Default for ParticleParams {
    fn default() -> Self {
        ParticleParams { a: [0.0, 0.0], b: [0.0, 0.0], theta: 0.0, k: 1.0 }
    }
}

/// Gravity strength used by the bundled cases.
pub const CASE_GRAVITY: f64 = 0.2;

impl ParticleParams {
    /// The four bundled configurations (`1..=4`).
    pub fn case(n: u8) -> Option<ParticleParams> {
        let k = CASE_GRAVITY;
        Some(match n {
            1 => ParticleParams { k, ..Default::default() },
            2 => ParticleParams { b: [0.25, 0.0], k, ..Default::default() },
            3 => ParticleParams { a: [0.25, 0.75], b: [0.75, 0.0], k, ..Default::default() },
            4 => ParticleParams { theta: PI / 4.0, k, ..Default::default() },
            _ => return None,
        })
    }

    pub(crate) fn constants(&self) -> BTreeMap<String, f64> {
        let mut c = BTreeMap::new();
        c.insert("a1".into(), self.a[0]);
        c.insert("a2".into(), self.a[1]);
        c.insert("b1".into(), self.b[0]);
        c.insert("b2".into(), self.b[1]);
        c.insert("k".into(), self.k);
        c.insert("ct".into(), self.theta.cos());
        c.insert("st".into(), self.theta.sin());
        c
    }
}

/// Expression sources of the particle model, in terms of the named
/// constants `a1 a2 b1 b2 k ct st`.
pub const D_SRC: [[&str; 2]; 2] = [["1", "0"], ["0", "1"]];
pub const P_SRC: &str = "-k/sqrt((q1 - a1)^2 + (q2 - a2)^2)";
pub const B_SRC: [&str; 2] = ["ct*q1 - st*q2", "st*q1 + ct*q2"];
pub const BPERP_SRC: [&str; 2] = ["-(st*q1 + ct*q2)", "ct*q1 - st*q2"];
pub const H_SRC: &str = "sqrt((q1 - b1)^2 + (q2 - b2)^2) - 1";
pub const SIGMA_SRC: [&str; 2] = ["b1 + cos(s)", "b2 + sin(s)"];

pub fn particle(p: &ParticleParams) -> Result<FullModel, ReductionError> {
    let c = p.constants();
    let qv = ["q1", "q2"];
    let q = |src: &str| Expr::parse_with_constants(src, &qv, &c);
    let s = |src: &str| Expr::parse_with_constants(src, &["s"], &c);
    let parts = FullModelParts {
        d: D_SRC.iter().map(|r| r.iter().map(|e| q(e)).collect()).collect::<Result<_, _>>()?,
        p: q(P_SRC)?,
        b: B_SRC.iter().map(|e| q(e).map(|x| vec![x])).collect::<Result<_, _>>()?,
        bperp: BPERP_SRC.iter().map(|e| q(e)).collect::<Result<_, _>>()?,
        h: vec![q(H_SRC)?],
        sigma: SIGMA_SRC.iter().map(|e| s(e)).collect::<Result<_, _>>()?,
        topology: Topology::Circle { period: TAU },
    };
    FullModel::new(parts, &ValidationOptions::default())
}
