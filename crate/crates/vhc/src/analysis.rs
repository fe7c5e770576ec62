//! Virtual mass `M̃(x) = exp(−2∫₀ˣΨ₂)` and virtual potential
//! `Ṽ(x) = −∫₀ˣ Ψ₁ M̃`, their extension to all of ℝ, and the resulting
//! Lagrangian classification.

use serde::Serialize;
use thiserror::Error;

use crate::interp::UniformSamples;
use crate::quad::{adaptive_simpson, QuadError, SimpsonOptions};
use crate::reduction::{ReducedDynamics, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid option: {0}")]
    Options(String),
    #[error("quadrature failed on cell [{a}, {b}]: {source}")]
    Quadrature { a: f64, b: f64, source: QuadError },
    #[error("virtual mass is not finite and positive at x = {x}")]
    BadMass { x: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct PairOptions {
    /// Number of grid cells on the base interval.
    pub n: usize,
    /// Absolute quadrature error target per value.
    pub quad_tol: f64,
    /// Threshold for treating `M̃(T)` as 1 when extending `Ṽ`.
    pub eps_m: f64,
    /// Line topology: the grid covers `[−w, w]`.
    pub line_half_width: f64,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { n: 2048, quad_tol: 1e-10, eps_m: 1e-6, line_half_width: std::f64::consts::PI }
    }
}

// 8-point Gauss–Legendre on [-1, 1]
const GL_X: [f64; 4] = [0.1834346424956498, 0.525_532_409_916_329, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.362_683_783_378_362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

pub(crate) fn gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..4 {
        s += GL_W[i] * (f(c - r * GL_X[i]) + f(c + r * GL_X[i]));
    }
    s * r
}

/// Per-cell integrals: `∫_a^b Ψ₂` and `∫_a^b Ψ₁(τ) exp(−2∫_a^τ Ψ₂) dτ`.
fn cell(rd: &ReducedDynamics, a: f64, b: f64, tol: f64) -> Result<(f64, f64), AnalysisError> {
    let opts = SimpsonOptions::with_tol(tol);
    let wrap = |source| AnalysisError::Quadrature { a, b, source };
    let i2 = adaptive_simpson(&mut |x| rd.psi2(x), a, b, opts).map_err(wrap)?;
    let q = adaptive_simpson(
        &mut |tau| {
            let inner = if tau == a { 0.0 } else { gauss8(|u| rd.psi2(u), a, tau) };
            rd.psi1(tau) * (-2.0 * inner).exp()
        },
        a,
        b,
        opts,
    )
    .map_err(wrap)?;
    Ok((i2, q))
}

/// Grid-sampled virtual mass and potential.
#[derive(Debug, Clone)]
pub struct VirtualPair {
    rd: ReducedDynamics,
    opts: PairOptions,
    x0: f64,
    h: f64,
    /// index of the grid node at x = 0
    origin: usize,
    i2: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    /// normalized cell integrals `∫_{x_k}^{x_{k+1}} Ψ₁ exp(−2∫_{x_k}^τ Ψ₂)`
    q: Vec<f64>,
    i2_interp: UniformSamples,
    v_interp: UniformSamples,
    mt: f64,
    vt: f64,
    vmin: f64,
    vmax: f64,
}

impl VirtualPair {
    pub fn new(rd: &ReducedDynamics, opts: &PairOptions) -> Result<Self, AnalysisError> {
        if opts.n < 64 {
            return Err(AnalysisError::Options(format!("grid size must be at least 64, got {}", opts.n)));
        }
        if !(opts.quad_tol > 0.0) {
            return Err(AnalysisError::Options("quad_tol must be positive".into()));
        }
        let n = opts.n;
        let cell_tol = opts.quad_tol / n as f64;
        let (x0, h, origin) = match rd.topology() {
            Topology::Circle { period } => (0.0, period / n as f64, 0),
            Topology::Line => {
                let w = opts.line_half_width;
                if !(w > 0.0) {
                    return Err(AnalysisError::Options("line_half_width must be positive".into()));
                }
                let n = n + n % 2;
                (-w, 2.0 * w / n as f64, n / 2)
            }
        };
        let cells = if rd.topology() == Topology::Line { n + n % 2 } else { n };
        let mut d2 = vec![0.0; cells];
        let mut q = vec![0.0; cells];
        for k in 0..cells {
            let a = x0 + h * k as f64;
            let b = x0 + h * (k + 1) as f64;
            let (i, qq) = cell(rd, a, b, cell_tol)?;
            d2[k] = i;
            q[k] = qq;
        }
        let mut i2 = vec![0.0; cells + 1];
        for k in origin..cells {
            i2[k + 1] = i2[k] + d2[k];
        }
        for k in (0..origin).rev() {
            i2[k] = i2[k + 1] - d2[k];
        }
        let m: Vec<f64> = i2.iter().map(|&i| (-2.0 * i).exp()).collect();
        for (k, &mk) in m.iter().enumerate() {
            if !(mk.is_finite() && mk > 0.0) {
                return Err(AnalysisError::BadMass { x: x0 + h * k as f64 });
            }
        }
        let mut v = vec![0.0; cells + 1];
        for k in origin..cells {
            v[k + 1] = v[k] - m[k] * q[k];
        }
        for k in (0..origin).rev() {
            v[k] = v[k + 1] + m[k] * q[k];
        }
        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mt, vt) = match rd.topology() {
            Topology::Circle { .. } => (m[cells], v[cells]),
            Topology::Line => (f64::NAN, f64::NAN),
        };
        let i2_interp = UniformSamples::new(x0, h, i2.clone());
        let v_interp = UniformSamples::new(x0, h, v.clone());
        Ok(VirtualPair { rd: rd.clone(), opts: *opts, x0, h, origin, i2, m, v, q, i2_interp, v_interp, mt, vt, vmin, vmax })
    }

    pub fn with_defaults(rd: &ReducedDynamics) -> Result<Self, AnalysisError> {
        Self::new(rd, &PairOptions::default())
    }

    pub fn dynamics(&self) -> &ReducedDynamics {
        &self.rd
    }

    pub fn options(&self) -> &PairOptions {
        &self.opts
    }

    pub fn topology(&self) -> Topology {
        self.rd.topology()
    }

    pub fn quad_tol(&self) -> f64 {
        self.opts.quad_tol
    }

    /// Grid nodes.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.m.len()).map(|k| self.x0 + self.h * k as f64).collect()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn grid_m(&self) -> &[f64] {
        &self.m
    }

    pub fn grid_v(&self) -> &[f64] {
        &self.v
    }

    /// Cumulative `∫₀^{x_k} Ψ₂` on the grid.
    pub fn grid_i2(&self) -> &[f64] {
        &self.i2
    }

    pub(crate) fn cell_q(&self) -> &[f64] {
        &self.q
    }

    /// `M̃(T)` (NaN on a line).
    pub fn mt(&self) -> f64 {
        self.mt
    }

    /// `Ṽ(T)` (NaN on a line).
    pub fn vt(&self) -> f64 {
        self.vt
    }

    /// `∫₀ᵀ Ψ₂` (NaN on a line).
    pub fn int_psi2(&self) -> f64 {
        match self.topology() {
            Topology::Circle { .. } => *self.i2.last().unwrap(),
            Topology::Line => f64::NAN,
        }
    }

    pub fn vmin(&self) -> f64 {
        self.vmin
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    /// `(I₂(x), Ṽ(x))` for x outside the line grid, by marching cells.
    fn line_extend(&self, x: f64) -> (f64, f64) {
        let tol = self.opts.quad_tol / self.opts.n as f64;
        let last = self.m.len() - 1;
        let (mut a, mut i2, mut v, dir) =
            if x > self.x0 { (self.x0 + self.h * last as f64, self.i2[last], self.v[last], 1.0) } else { (self.x0, self.i2[0], self.v[0], -1.0) };
        while (x - a) * dir > 0.0 {
            let b = if (x - a).abs() > self.h { a + dir * self.h } else { x };
            match cell(&self.rd, a, b, tol) {
                Ok((d2, q)) => {
                    v -= (-2.0 * i2).exp() * q;
                    i2 += d2;
                }
                Err(_) => return (f64::NAN, f64::NAN),
            }
            a = b;
        }
        (i2, v)
    }

    fn base_split(&self, x: f64) -> (f64, f64) {
        let t = self.rd.period().expect("circle");
        let n = (x / t).floor();
        let mut x0 = x - n * t;
        if x0 >= t {
            x0 -= t;
        }
        (n, x0.max(0.0))
    }

    /// `M̃(x)` for any real `x`.
    pub fn eval_m(&self, x: f64) -> f64 {
        match self.topology() {
            Topology::Circle { .. } => {
                let (n, x0) = self.base_split(x);
                self.mt.powf(n) * (-2.0 * self.i2_interp.eval(x0)).exp()
            }
            Topology::Line => {
                if x >= self.x0 && x <= self.i2_interp.x_end() {
                    (-2.0 * self.i2_interp.eval(x)).exp()
                } else {
                    (-2.0 * self.line_extend(x).0).exp()
                }
            }
        }
    }

    /// `Ṽ(x)` for any real `x`.
    pub fn eval_v(&self, x: f64) -> f64 {
        match self.topology() {
            Topology::Circle { .. } => {
                let (n, x0) = self.base_split(x);
                let v0 = self.v_interp.eval(x0);
                if (self.mt - 1.0).abs() > self.opts.eps_m {
                    let mn = self.mt.powf(n);
                    mn * v0 + self.vt * (mn - 1.0) / (self.mt - 1.0)
                } else {
                    v0 + n * self.vt
                }
            }
            Topology::Line => {
                if x >= self.x0 && x <= self.v_interp.x_end() {
                    self.v_interp.eval(x)
                } else {
                    self.line_extend(x).1
                }
            }
        }
    }

    /// Brute-force `M̃(x)`, `Ṽ(x)` by marching cells from 0 (test oracle and
    /// diagnostics).
    pub fn direct(&self, x: f64) -> Result<(f64, f64), AnalysisError> {
        let tol = self.opts.quad_tol / self.opts.n as f64;
        let dir = if x >= 0.0 { 1.0 } else { -1.0 };
        let (mut a, mut i2, mut v) = (0.0f64, 0.0f64, 0.0f64);
        while (x - a) * dir > 0.0 {
            let b = if (x - a).abs() > self.h { a + dir * self.h } else { x };
            let (d2, q) = cell(&self.rd, a, b, tol)?;
            v -= (-2.0 * i2).exp() * q;
            i2 += d2;
            a = b;
        }
        Ok(((-2.0 * i2).exp(), v))
    }

    #[doc(hidden)]
    pub fn origin_index(&self) -> usize {
        self.origin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    MechanicalLine,
    ElMechanical,
    Sel,
    NonLagrangian,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::MechanicalLine => "mechanical_line",
            Kind::ElMechanical => "el_mechanical",
            Kind::Sel => "sel",
            Kind::NonLagrangian => "non_lagrangian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evidence {
    #[serde(rename = "MT")]
    pub mt: f64,
    #[serde(rename = "VT")]
    pub vt: f64,
    pub eps_m: f64,
    pub eps_v: f64,
    pub scale: f64,
    pub quad_tol: f64,
    pub grid: usize,
    pub vmin: f64,
    pub vmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    pub evidence: Evidence,
    pub limit_cycle_hypotheses: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub eps_m: f64,
    pub eps_v: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { eps_m: 1e-6, eps_v: 1e-6 }
    }
}

pub fn classify(vp: &VirtualPair, opts: &ClassifyOptions) -> Classification {
    let scale = vp.vmin.abs().max(vp.vmax.abs()).max(1.0);
    let kind = match vp.topology() {
        Topology::Line => Kind::MechanicalLine,
        Topology::Circle { .. } => {
            if (vp.mt - 1.0).abs() > opts.eps_m {
                Kind::NonLagrangian
            } else if vp.vt.abs() <= opts.eps_v * scale {
                Kind::ElMechanical
            } else {
                Kind::Sel
            }
        }
    };
    Classification {
        kind,
        evidence: Evidence {
            mt: vp.mt,
            vt: vp.vt,
            eps_m: opts.eps_m,
            eps_v: opts.eps_v,
            scale,
            quad_tol: vp.opts.quad_tol,
            grid: vp.opts.n,
            vmin: vp.vmin,
            vmax: vp.vmax,
        },
        limit_cycle_hypotheses: limit_cycle_hypotheses(&vp.rd, vp),
    }
}

/// Sign conditions for an exponentially stable limit cycle: Ψ₁ of one
/// strict sign on the grid and `∫₀ᵀΨ₂` of the opposite strict sign.
pub fn limit_cycle_hypotheses(rd: &ReducedDynamics, vp: &VirtualPair) -> bool {
    let Some(period) = rd.period() else { return false };
    let margin = vp.opts.quad_tol;
    let n = vp.opts.n;
    let mut pos = true;
    let mut neg = true;
    for k in 0..n {
        let p = rd.psi1(period * k as f64 / n as f64);
        pos &= p > margin;
        neg &= p < -margin;
    }
    let int2 = vp.int_psi2();
    (pos && int2 < -margin) || (neg && int2 > margin)
}
