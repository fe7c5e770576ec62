//! Lagrangians of EL and SEL reduced dynamics, with closed-form partial
//! derivatives and Euler–Lagrange residuals.

mod fresnel;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{Classification, Kind, VirtualPair};
use crate::reduction::ReducedDynamics;

pub use fresnel::{fresnel, fresnel_c, fresnel_s};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagrangianError {
    #[error("the reduced dynamics are neither EL nor SEL; no Lagrangian exists")]
    NoLagrangian,
    #[error("f0 = 1/V(T) is not finite and nonzero (V(T) = {vt})")]
    BadF0 { vt: f64 },
}

#[derive(Debug, Clone)]
pub enum LagrangianHandle {
    /// `L = ½ M̃(x) ẋ² − Ṽ(x)`.
    Mechanical { vp: VirtualPair },
    /// Fresnel-integral Lagrangian with `f0 = 1/Ṽ(T)`.
    SingularFresnel { f0: f64, vp: VirtualPair },
}

/// Serializable summary of a handle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Descriptor {
    pub variant: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
}

/// Pointwise data shared by all SEL formulas.
struct Sel {
    sg: f64,
    rho: f64,
    w: f64,
    phi: f64,
    m: f64,
    e0: f64,
    psi1: f64,
    psi2: f64,
    c: f64,
    s: f64,
}

pub fn synthesize(cls: &Classification, vp: &VirtualPair) -> Result<LagrangianHandle, LagrangianError> {
    match cls.kind {
        Kind::MechanicalLine | Kind::ElMechanical => Ok(LagrangianHandle::Mechanical { vp: vp.clone() }),
        Kind::Sel => {
            let f0 = 1.0 / vp.vt();
            if !(f0.is_finite() && f0 != 0.0) {
                return Err(LagrangianError::BadF0 { vt: vp.vt() });
            }
            Ok(LagrangianHandle::SingularFresnel { f0, vp: vp.clone() })
        }
        Kind::NonLagrangian => Err(LagrangianError::NoLagrangian),
    }
}

/// `Ẽ₀(x, ẋ) = ½ M̃(x) ẋ² + Ṽ(x)`.
pub fn energy(vp: &VirtualPair, x: f64, xdot: f64) -> f64 {
    0.5 * vp.eval_m(x) * xdot * xdot + vp.eval_v(x)
}

impl LagrangianHandle {
    pub fn vp(&self) -> &VirtualPair {
        match self {
            LagrangianHandle::Mechanical { vp } | LagrangianHandle::SingularFresnel { vp, .. } => vp,
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        match self {
            LagrangianHandle::Mechanical { .. } => Descriptor { variant: "mechanical", f0: None },
            LagrangianHandle::SingularFresnel { f0, .. } => Descriptor { variant: "singular_fresnel", f0: Some(*f0) },
        }
    }

    fn sel(&self, f0: f64, x: f64, xdot: f64) -> Sel {
        let vp = self.vp();
        let rd = vp.dynamics();
        let m = vp.eval_m(x);
        let v = vp.eval_v(x);
        let sg = f0.signum();
        let rho = (2.0 * f0.abs() * m).sqrt();
        let w = 2.0 * PI * f0;
        let (c, s) = fresnel(rho * xdot);
        Sel { sg, rho, w, phi: w * v, m, e0: 0.5 * m * xdot * xdot + v, psi1: rd.psi1(x), psi2: rd.psi2(x), c, s }
    }

    /// `L(x, ẋ)`.
    pub fn eval(&self, x: f64, xdot: f64) -> f64 {
        match self {
            LagrangianHandle::Mechanical { vp } => 0.5 * vp.eval_m(x) * xdot * xdot - vp.eval_v(x),
            LagrangianHandle::SingularFresnel { f0, .. } => {
                let k = self.sel(*f0, x, xdot);
                -(k.w * k.e0).sin() + xdot * Self::momentum_sel(&k)
            }
        }
    }

    // σρπ[cos φ C(u) − σ sin φ S(u)]
    fn momentum_sel(k: &Sel) -> f64 {
        k.sg * k.rho * PI * (k.phi.cos() * k.c - k.sg * k.phi.sin() * k.s)
    }

    /// `∂L/∂ẋ`.
    pub fn dl_dxdot(&self, x: f64, xdot: f64) -> f64 {
        match self {
            LagrangianHandle::Mechanical { vp } => vp.eval_m(x) * xdot,
            LagrangianHandle::SingularFresnel { f0, .. } => Self::momentum_sel(&self.sel(*f0, x, xdot)),
        }
    }

    /// `∂²L/∂ẋ²`, the coefficient of `ẍ` in the Euler–Lagrange equation.
    pub fn alpha(&self, x: f64, xdot: f64) -> f64 {
        match self {
            LagrangianHandle::Mechanical { vp } => vp.eval_m(x),
            LagrangianHandle::SingularFresnel { f0, vp } => {
                let m = vp.eval_m(x);
                let w = 2.0 * PI * f0;
                w * m * (w * (0.5 * m * xdot * xdot + vp.eval_v(x))).cos()
            }
        }
    }

    /// `∂²L/∂x∂ẋ`.
    fn dp_dx(&self, x: f64, xdot: f64) -> f64 {
        match self {
            LagrangianHandle::Mechanical { vp } => -2.0 * vp.dynamics().psi2(x) * vp.eval_m(x) * xdot,
            LagrangianHandle::SingularFresnel { f0, .. } => {
                let k = self.sel(*f0, x, xdot);
                let drho = -k.psi2 * k.rho;
                let dphi = -k.w * k.psi1 * k.m;
                let (sp, cp) = k.phi.sin_cos();
                k.sg * PI * drho * (cp * k.c - k.sg * sp * k.s) - k.sg * k.rho * PI * dphi * (sp * k.c + k.sg * cp * k.s)
                    + k.sg * k.rho * PI * drho * xdot * (k.w * k.e0).cos()
            }
        }
    }

    /// `∂L/∂x`.
    pub fn dl_dx(&self, x: f64, xdot: f64) -> f64 {
        match self {
            LagrangianHandle::Mechanical { vp } => {
                let rd = vp.dynamics();
                let m = vp.eval_m(x);
                -rd.psi2(x) * m * xdot * xdot + rd.psi1(x) * m
            }
            LagrangianHandle::SingularFresnel { f0, .. } => {
                let k = self.sel(*f0, x, xdot);
                let de0 = -k.psi2 * k.m * xdot * xdot - k.psi1 * k.m;
                -k.w * (k.w * k.e0).cos() * de0 + xdot * self.dp_dx(x, xdot)
            }
        }
    }

    /// `d/dt(∂L/∂ẋ) − ∂L/∂x` along `(x, ẋ, ẍ)`. The reduced dynamics supply
    /// Ψ₁, Ψ₂ through the virtual pair the handle was built from; `rd` must
    /// describe the same system.
    pub fn el_residual(&self, rd: &ReducedDynamics, x: f64, xdot: f64, xddot: f64) -> f64 {
        debug_assert_eq!(rd.topology(), self.vp().topology());
        self.dp_dx(x, xdot) * xdot + self.alpha(x, xdot) * xddot - self.dl_dx(x, xdot)
    }

    pub fn energy(&self, x: f64, xdot: f64) -> f64 {
        energy(self.vp(), x, xdot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify, ClassifyOptions, PairOptions};
    use crate::reduction::Topology;
    use std::f64::consts::TAU;

    fn handle(p1: &str, p2: &str, period: f64) -> (ReducedDynamics, LagrangianHandle) {
        let rd = ReducedDynamics::from_exprs(p1, p2, Topology::Circle { period }).unwrap();
        let vp = VirtualPair::new(&rd, &PairOptions::default()).unwrap();
        let cls = classify(&vp, &ClassifyOptions::default());
        (rd, synthesize(&cls, &vp).unwrap())
    }

    #[test]
    fn free_particle_lagrangian() {
        let (_, h) = handle("0", "0", TAU);
        assert!(matches!(h, LagrangianHandle::Mechanical { .. }));
        assert_eq!(h.eval(1.3, 2.0), 2.0);
        assert_eq!(h.energy(0.4, -3.0), 4.5);
    }

    #[test]
    fn non_lagrangian_has_no_handle() {
        let rd = ReducedDynamics::from_exprs("-cos(s) - 2", "sin(s) + 2", Topology::Circle { period: TAU }).unwrap();
        let vp = VirtualPair::with_defaults(&rd).unwrap();
        let cls = classify(&vp, &ClassifyOptions::default());
        assert_eq!(synthesize(&cls, &vp).unwrap_err(), LagrangianError::NoLagrangian);
    }

    #[test]
    fn partials_match_finite_differences() {
        for (p1, p2) in [("sin(2*s)/(2 + cos(s))", "-sin(s)/(2 + cos(s))"), ("cos(s) + 0.5", "cos(s)"), ("0.7", "0")] {
            let (_, h) = handle(p1, p2, TAU);
            for &(x, v) in &[(0.3, 0.8), (2.2, -1.4), (5.0, 0.2), (-4.0, 1.9)] {
                let e = 1e-5;
                let fx = (h.eval(x + e, v) - h.eval(x - e, v)) / (2.0 * e);
                let fv = (h.eval(x, v + e) - h.eval(x, v - e)) / (2.0 * e);
                let gx = h.dl_dx(x, v);
                let gv = h.dl_dxdot(x, v);
                assert!((fx - gx).abs() <= 1e-6 * gx.abs().max(1.0), "{p1}: dL/dx {fx} vs {gx}");
                assert!((fv - gv).abs() <= 1e-6 * gv.abs().max(1.0), "{p1}: dL/dxdot {fv} vs {gv}");
                let av = (h.dl_dxdot(x, v + e) - h.dl_dxdot(x, v - e)) / (2.0 * e);
                assert!((av - h.alpha(x, v)).abs() <= 1e-6 * av.abs().max(1.0));
            }
        }
    }

    #[test]
    fn negative_f0_branch_factorizes() {
        // s̈ = 0.5 on [ℝ]_{2π}: Ṽ = −x/2, f0 = −1/π
        let (rd, h) = handle("0.5", "0", TAU);
        let LagrangianHandle::SingularFresnel { f0, .. } = h else { panic!("expected SEL") };
        assert!((f0 + 1.0 / PI).abs() < 1e-9);
        for &(x, v, a) in &[(0.1, 0.5, 2.0), (3.0, -1.2, -0.7), (-2.0, 2.5, 0.5)] {
            let r = h.el_residual(&rd, x, v, a);
            let expect = h.alpha(x, v) * (a - rd.accel(x, v));
            assert!((r - expect).abs() <= 1e-9 * expect.abs().max(1e-3), "{r} vs {expect}");
        }
    }

    #[test]
    fn sel_lagrangian_is_periodic() {
        let (_, h) = handle("cos(s) + 0.5", "cos(s)", TAU);
        for &(x, v) in &[(0.2, 0.3), (1.0, -1.0), (4.0, 2.0)] {
            assert!((h.eval(x + TAU, v) - h.eval(x, v)).abs() < 1e-8);
        }
    }
}
