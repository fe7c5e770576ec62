//! Degree ±1 diffeomorphisms between circles `[ℝ]_{T1} → [ℝ]_{T2}`, the
//! induced change of reduced dynamics, and the conservative normal form.

use thiserror::Error;

use crate::analysis::{gauss8, AnalysisError, VirtualPair};
use crate::expr::{Expr, ExprError};
use crate::function::ScalarFn;
use crate::interp::PeriodicSamples;
use crate::reduction::{ReducedDynamics, ReductionError, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum XformError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("periods must be finite and positive (T1 = {t1}, T2 = {t2})")]
    BadPeriods { t1: f64, t2: f64 },
    #[error("map is not strictly monotone: derivative {value} at x = {x}")]
    NotMonotone { x: f64, value: f64 },
    #[error("map does not have degree ±1: phi(x + T1) - phi(x) = {gap} at x = {x}")]
    BadDegree { x: f64, gap: f64 },
    #[error("reduced dynamics must live on a circle of period {expected}")]
    PeriodMismatch { expected: f64 },
    #[error("virtual mass is not periodic (M(T) = {mt}); no conservative form exists")]
    MassNotPeriodic { mt: f64 },
}

#[derive(Debug, Clone)]
enum Map {
    Expr { phi: Expr, dphi: Expr, ddphi: Expr, inverse: Option<Expr> },
    /// `φ̃(x) = slope·x + p(x)` with `p`, `φ̃′`, `φ̃″` periodic samples.
    Sampled { slope: f64, p: PeriodicSamples, dphi: PeriodicSamples, ddphi: PeriodicSamples },
}

/// Lift `φ̃: ℝ → ℝ` of a circle diffeomorphism, `φ̃(x + T1) = φ̃(x) ± T2`.
#[derive(Debug, Clone)]
pub struct CircleDiffeo {
    map: Map,
    t1: f64,
    t2: f64,
    degree: i8,
}

#[derive(Debug, Clone, Copy)]
pub struct XformOptions {
    /// Grid size for sampled output and monotonicity checks.
    pub n: usize,
}

impl Default for XformOptions {
    fn default() -> Self {
        XformOptions { n: 2048 }
    }
}

// deterministic, well-spread check points in [0, 1)
fn check_points(count: usize) -> impl Iterator<Item = f64> {
    const G: f64 = 0.618_033_988_749_894_9;
    (0..count).map(|k| (0.5 + G * k as f64).fract())
}

impl CircleDiffeo {
    /// From an expression for `φ̃` in `s`, with an optional closed-form
    /// inverse (also in `s`).
    pub fn from_expr(phi: &str, inverse: Option<&str>, t1: f64, t2: f64) -> Result<Self, XformError> {
        let phi = Expr::parse(phi, &["s"])?;
        let inverse = inverse.map(|src| Expr::parse(src, &["s"])).transpose()?;
        let dphi = phi.derivative(0);
        let ddphi = dphi.derivative(0);
        Self::build(Map::Expr { phi, dphi, ddphi, inverse }, t1, t2, XformOptions::default().n)
    }

    /// From samples of `φ̃`, `φ̃′`, `φ̃″` at `x_k = k·T1/n`, `k = 0..n`.
    pub fn from_samples(t1: f64, t2: f64, phi: &[f64], dphi: Vec<f64>, ddphi: Vec<f64>) -> Result<Self, XformError> {
        let n = dphi.len();
        assert!(phi.len() == n && ddphi.len() == n, "sample arrays must have equal length");
        let degree = if dphi[0] < 0.0 { -1.0 } else { 1.0 };
        let slope = degree * t2 / t1;
        let h = t1 / n as f64;
        let p: Vec<f64> = phi.iter().enumerate().map(|(k, &v)| v - slope * h * k as f64).collect();
        let map = Map::Sampled {
            slope,
            p: PeriodicSamples::new(t1, p),
            dphi: PeriodicSamples::new(t1, dphi),
            ddphi: PeriodicSamples::new(t1, ddphi),
        };
        Self::build(map, t1, t2, n)
    }

    pub fn identity(t: f64) -> Self {
        Self::from_expr("s", Some("s"), t, t).expect("identity is a valid diffeomorphism")
    }

    fn build(map: Map, t1: f64, t2: f64, n: usize) -> Result<Self, XformError> {
        if !(t1.is_finite() && t1 > 0.0 && t2.is_finite() && t2 > 0.0) {
            return Err(XformError::BadPeriods { t1, t2 });
        }
        let mut d = CircleDiffeo { map, t1, t2, degree: 1 };
        let d0 = d.dphi(0.0);
        d.degree = if d0 < 0.0 { -1 } else { 1 };
        for k in 0..n {
            let x = t1 * k as f64 / n as f64;
            let v = d.dphi(x);
            if !(v * d.degree as f64 > 0.0) {
                return Err(XformError::NotMonotone { x, value: v });
            }
        }
        for u in check_points(50) {
            let x = (u - 0.5) * 4.0 * t1;
            let gap = d.phi(x + t1) - d.phi(x);
            if !((gap - d.degree as f64 * t2).abs() <= 1e-8) {
                return Err(XformError::BadDegree { x, gap });
            }
        }
        Ok(d)
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn degree(&self) -> i8 {
        self.degree
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.map, Map::Expr { .. })
    }

    pub fn phi(&self, x: f64) -> f64 {
        match &self.map {
            Map::Expr { phi, .. } => phi.eval(&[x]).unwrap_or(f64::NAN),
            Map::Sampled { slope, p, .. } => slope * x + p.eval(x),
        }
    }

    pub fn dphi(&self, x: f64) -> f64 {
        match &self.map {
            Map::Expr { dphi, .. } => dphi.eval(&[x]).unwrap_or(f64::NAN),
            Map::Sampled { dphi, .. } => dphi.eval(x),
        }
    }

    pub fn ddphi(&self, x: f64) -> f64 {
        match &self.map {
            Map::Expr { ddphi, .. } => ddphi.eval(&[x]).unwrap_or(f64::NAN),
            Map::Sampled { ddphi, .. } => ddphi.eval(x),
        }
    }

    /// `φ̃⁻¹(y)`: closed form when available, otherwise bisection on one
    /// period followed by Newton refinement inside the bracket.
    pub fn inverse(&self, y: f64) -> f64 {
        if let Map::Expr { inverse: Some(inv), .. } = &self.map {
            return inv.eval(&[y]).unwrap_or(f64::NAN);
        }
        let y0 = self.phi(0.0);
        let deg = self.degree as f64;
        // shift y into the image of [0, T1]
        let m = (deg * (y - y0) / self.t2).floor();
        let target = y - deg * m * self.t2;
        let g = |x: f64| deg * (self.phi(x) - target);
        let (mut lo, mut hi) = (0.0, self.t1);
        while hi - lo > 1e-3 * self.t1 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..50 {
            let r = self.phi(x) - target;
            let step = r / self.dphi(x);
            let next = (x - step).clamp(lo, hi);
            if (next - x).abs() <= 1e-15 * self.t1 {
                x = next;
                break;
            }
            x = next;
        }
        x + m * self.t1
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CircleDiffeo, opts: &XformOptions) -> Result<CircleDiffeo, XformError> {
        if (other.t1 - self.t2).abs() > 1e-12 * self.t2 {
            return Err(XformError::PeriodMismatch { expected: self.t2 });
        }
        if let (Map::Expr { phi: a, inverse: Some(ai), .. }, Map::Expr { phi: b, inverse: Some(bi), .. }) = (&self.map, &other.map) {
            let phi = b.compose(std::slice::from_ref(a));
            let inv = ai.compose(std::slice::from_ref(bi));
            let dphi = phi.derivative(0);
            let ddphi = dphi.derivative(0);
            return Self::build(Map::Expr { phi, dphi, ddphi, inverse: Some(inv) }, self.t1, other.t2, opts.n);
        }
        let n = opts.n;
        let h = self.t1 / n as f64;
        let mut phi = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for k in 0..n {
            let x = h * k as f64;
            let y = self.phi(x);
            let (a1, a2) = (self.dphi(x), self.ddphi(x));
            let (b1, b2) = (other.dphi(y), other.ddphi(y));
            phi.push(other.phi(y));
            d1.push(b1 * a1);
            d2.push(b2 * a1 * a1 + b1 * a2);
        }
        Self::from_samples(self.t1, other.t2, &phi, d1, d2)
    }
}

fn as_s_expr(f: &ScalarFn) -> Option<&Expr> {
    f.as_expr().filter(|e| e.vars().len() == 1 && e.vars()[0] == "s")
}

/// Reduced dynamics in the coordinate `y = φ̃(x)`:
/// `Ψ₁²∘φ̃ = φ̃′Ψ₁¹`, `Ψ₂²∘φ̃ = Ψ₂¹/φ̃′ + φ̃″/φ̃′²`.
pub fn transform(rd: &ReducedDynamics, d: &CircleDiffeo, opts: &XformOptions) -> Result<ReducedDynamics, XformError> {
    match rd.period() {
        Some(t) if (t - d.t1).abs() <= 1e-12 * d.t1 => {}
        _ => return Err(XformError::PeriodMismatch { expected: d.t1 }),
    }
    let topo = Topology::Circle { period: d.t2 };
    if let Map::Expr { dphi, ddphi, inverse: Some(inv), .. } = &d.map {
        if let (Some(p1), Some(p2)) = (as_s_expr(rd.psi1_fn()), as_s_expr(rd.psi2_fn())) {
            let q1 = dphi.mul(p1).compose(std::slice::from_ref(inv));
            let q2 = p2.div(dphi).add(&ddphi.div(&dphi.mul(dphi))).compose(std::slice::from_ref(inv));
            return Ok(ReducedDynamics::new(ScalarFn::expr(q1), ScalarFn::expr(q2), topo)?);
        }
    }
    let n = opts.n;
    let h = d.t2 / n as f64;
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    for j in 0..n {
        let x = d.inverse(h * j as f64);
        let (a1, a2) = (d.dphi(x), d.ddphi(x));
        v1.push(a1 * rd.psi1(x));
        v2.push(rd.psi2(x) / a1 + a2 / (a1 * a1));
    }
    Ok(ReducedDynamics::new(
        ScalarFn::Sampled(PeriodicSamples::new(d.t2, v1)),
        ScalarFn::Sampled(PeriodicSamples::new(d.t2, v2)),
        topo,
    )?)
}

/// The change of coordinates `φ̃(x) = λ∫₀ˣ√M̃₁` with `λ = T2/∫₀^{T1}√M̃₁`,
/// after which `M̃₂ ≡ 1` and `Ψ₂² ≡ 0`. Requires a periodic virtual mass.
pub fn conservative_form(
    rd: &ReducedDynamics,
    vp: &VirtualPair,
    t2: f64,
    opts: &XformOptions,
) -> Result<(ReducedDynamics, CircleDiffeo), XformError> {
    let Some(t1) = rd.period() else {
        return Err(XformError::PeriodMismatch { expected: f64::NAN });
    };
    if (vp.mt() - 1.0).abs() > vp.options().eps_m {
        return Err(XformError::MassNotPeriodic { mt: vp.mt() });
    }
    let n = opts.n;
    let h = t1 / n as f64;
    let root_m = |x: f64| vp.eval_m(x).sqrt();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for k in 0..n {
        let (a, b) = (h * k as f64, h * (k + 1) as f64);
        cum.push(cum[k] + gauss8(root_m, a, b));
    }
    let lambda = t2 / cum[n];
    let phi: Vec<f64> = cum[..n].iter().map(|c| lambda * c).collect();
    // (√M̃)′ = −Ψ₂√M̃
    let d1: Vec<f64> = (0..n).map(|k| lambda * root_m(h * k as f64)).collect();
    let d2: Vec<f64> = (0..n).map(|k| -rd.psi2(h * k as f64) * d1[k]).collect();
    let d = CircleDiffeo::from_samples(t1, t2, &phi, d1, d2)?;
    Ok((transform(rd, &d, opts)?, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify, ClassifyOptions, PairOptions};
    use std::f64::consts::TAU;

    fn rd(p1: &str, p2: &str, t: f64) -> ReducedDynamics {
        ReducedDynamics::from_exprs(p1, p2, Topology::Circle { period: t }).unwrap()
    }

    #[test]
    fn identity_leaves_dynamics_unchanged() {
        let r = rd("sin(2*s)/(2 + cos(s))", "-sin(s)/(2 + cos(s))", TAU);
        let out = transform(&r, &CircleDiffeo::identity(TAU), &XformOptions::default()).unwrap();
        for k in 0..50 {
            let x = 0.13 * k as f64;
            assert!((out.psi1(x) - r.psi1(x)).abs() < 1e-15);
            assert!((out.psi2(x) - r.psi2(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_monotone_and_wrong_degree() {
        assert!(matches!(CircleDiffeo::from_expr("s + 2*sin(s)", None, TAU, TAU), Err(XformError::NotMonotone { .. })));
        assert!(matches!(CircleDiffeo::from_expr("2*s", None, TAU, TAU), Err(XformError::BadDegree { .. })));
    }

    #[test]
    fn numeric_inverse() {
        let d = CircleDiffeo::from_expr("s + 0.5*sin(s)", None, TAU, TAU).unwrap();
        for &y in &[-20.0, -3.0, 0.0, 0.1, 3.0, 6.2, 40.0] {
            assert!((d.phi(d.inverse(y)) - y).abs() < 1e-12, "y = {y}");
        }
        let r = CircleDiffeo::from_expr("-s/2 + 0.2*sin(s)", None, TAU, 3.0 * TAU / 6.0).unwrap();
        assert_eq!(r.degree(), -1);
        for &y in &[-7.0, 0.0, 2.5, 11.0] {
            assert!((r.phi(r.inverse(y)) - y).abs() < 1e-12, "y = {y}");
        }
    }

    #[test]
    fn closed_form_and_sampled_agree() {
        let r = rd("cos(s) + 0.5", "cos(s)", TAU);
        let ex = CircleDiffeo::from_expr("2*s", Some("s/2"), TAU, 2.0 * TAU).unwrap();
        let no_inv = CircleDiffeo::from_expr("2*s", None, TAU, 2.0 * TAU).unwrap();
        let a = transform(&r, &ex, &XformOptions::default()).unwrap();
        let b = transform(&r, &no_inv, &XformOptions::default()).unwrap();
        assert!(a.psi1_fn().as_expr().is_some() && b.psi1_fn().is_sampled());
        for k in 0..40 {
            let y = 0.31 * k as f64;
            assert!((a.psi1(y) - b.psi1(y)).abs() < 1e-9);
            assert!((a.psi2(y) - b.psi2(y)).abs() < 1e-9);
            // Ψ₂² = Ψ₂¹(y/2)/2
            assert!((a.psi2(y) - (y / 2.0).cos() / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_mass_gives_identity_form() {
        let r = rd("-sin(s)", "0", TAU);
        let vp = VirtualPair::with_defaults(&r).unwrap();
        let (r2, d) = conservative_form(&r, &vp, TAU, &XformOptions::default()).unwrap();
        for k in 0..30 {
            let x = 0.2 * k as f64;
            assert!((d.phi(x) - x).abs() < 1e-12);
            assert!((r2.psi1(x) + x.sin()).abs() < 1e-9);
            assert!(r2.psi2(x).abs() < 1e-12);
        }
    }

    #[test]
    fn conservative_form_flattens_the_mass() {
        let r = rd("sin(2*s)/(2 + cos(s))", "-sin(s)/(2 + cos(s))", TAU);
        let vp = VirtualPair::with_defaults(&r).unwrap();
        let (r2, _) = conservative_form(&r, &vp, 3.0, &XformOptions::default()).unwrap();
        let vp2 = VirtualPair::new(&r2, &PairOptions::default()).unwrap();
        assert!(vp2.grid_m().iter().all(|m| (m - 1.0).abs() < 1e-6));
        let c1 = classify(&vp, &ClassifyOptions::default());
        let c2 = classify(&vp2, &ClassifyOptions::default());
        assert_eq!(c1.kind, c2.kind);
    }
}
