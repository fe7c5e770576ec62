//! Full n-DOF models with an order-(n−1) virtual holonomic constraint and
//! their reduced dynamics `s̈ = Ψ₁(s) + Ψ₂(s) ṡ²`.

mod feedback;
pub mod particle;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::function::ScalarFn;

pub use feedback::{annihilated_residual, FullSample, FullTrajectory, SimulateOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Line,
    /// `[ℝ]_T`: positions identified modulo `period`.
    Circle { period: f64 },
}

impl Topology {
    pub fn period(&self) -> Option<f64> {
        match self {
            Topology::Line => None,
            Topology::Circle { period } => Some(*period),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Line => "line",
            Topology::Circle { .. } => "circle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("period must be finite and positive, got {0}")]
    BadPeriod(f64),
    #[error("D is not symmetric at s = {s} (asymmetry {gap:e})")]
    NotSymmetric { s: f64, gap: f64 },
    #[error("D is not positive definite at s = {s}")]
    NotPositiveDefinite { s: f64 },
    #[error("Bperp does not annihilate B at s = {s} (|Bperp B| = {residual:e})")]
    NotAnnihilator { s: f64, residual: f64 },
    #[error("h(sigma(s)) = {value:e} at s = {s}; sigma does not parametrize the constraint")]
    ConstraintViolated { s: f64, value: f64 },
    #[error("sigma'(s) vanishes at s = {s}")]
    IrregularParametrization { s: f64 },
    #[error("decoupling matrix is singular at s = {s} (condition estimate {cond:e})")]
    SingularDecoupling { s: f64, cond: f64 },
    #[error("D(q) is numerically singular")]
    SingularMass,
    #[error("decoupling matrix is singular at the given state (condition estimate {cond:e})")]
    SingularDecouplingAt { cond: f64 },
    #[error("reduction is singular: Bperp D sigma' vanishes at s = {s}")]
    SingularReduction { s: f64 },
    #[error("{which} is not periodic: mismatch {gap:e} at the seam")]
    NotPeriodic { which: &'static str, gap: f64 },
    #[error("closed-loop integration stopped at t = {t}: {reason}")]
    Integration { t: f64, reason: &'static str },
}

/// `s̈ = Ψ₁(s) + Ψ₂(s) ṡ²` on a line or a circle.
#[derive(Debug, Clone)]
pub struct ReducedDynamics {
    psi1: ScalarFn,
    psi2: ScalarFn,
    topology: Topology,
}

const SEAM_TOL: f64 = 1e-9;

fn seam_gap(f: &ScalarFn, period: f64) -> Result<f64, ExprError> {
    let a = f.eval(0.0)?;
    let b = f.eval(period)?;
    Ok((a - b).abs() / a.abs().max(b.abs()).max(1.0))
}

impl ReducedDynamics {
    /// Builds reduced dynamics; on a circle, checks that Ψ₁, Ψ₂ and their
    /// first derivatives match across the seam.
    pub fn new(psi1: ScalarFn, psi2: ScalarFn, topology: Topology) -> Result<Self, ReductionError> {
        if let Topology::Circle { period } = topology {
            if !(period.is_finite() && period > 0.0) {
                return Err(ReductionError::BadPeriod(period));
            }
            let checks: [(&'static str, ScalarFn); 4] = [
                ("psi1", psi1.clone()),
                ("psi2", psi2.clone()),
                ("psi1'", psi1.derivative()),
                ("psi2'", psi2.derivative()),
            ];
            for (which, f) in checks.iter() {
                let gap = seam_gap(f, period)?;
                if !(gap <= SEAM_TOL) {
                    return Err(ReductionError::NotPeriodic { which, gap });
                }
            }
        }
        Ok(ReducedDynamics { psi1, psi2, topology })
    }

    /// Parses both functions as expressions in `s`.
    pub fn from_exprs(psi1: &str, psi2: &str, topology: Topology) -> Result<Self, ReductionError> {
        let p1 = Expr::parse(psi1, &["s"])?;
        let p2 = Expr::parse(psi2, &["s"])?;
        Self::new(ScalarFn::expr(p1), ScalarFn::expr(p2), topology)
    }

    pub fn psi1_fn(&self) -> &ScalarFn {
        &self.psi1
    }

    pub fn psi2_fn(&self) -> &ScalarFn {
        &self.psi2
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn period(&self) -> Option<f64> {
        self.topology.period()
    }

    #[inline]
    pub fn psi1(&self, s: f64) -> f64 {
        self.psi1.eval_or_nan(s)
    }

    #[inline]
    pub fn psi2(&self, s: f64) -> f64 {
        self.psi2.eval_or_nan(s)
    }

    /// Right-hand side `Ψ₁(s) + Ψ₂(s) ṡ²`.
    #[inline]
    pub fn accel(&self, s: f64, sdot: f64) -> f64 {
        self.psi1(s) + self.psi2(s) * sdot * sdot
    }
}

/// Grid-based validation settings for [`FullModel::new`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub grid: usize,
    /// Parameter range checked for line topology (circles use `[0, T]`).
    pub line_range: (f64, f64),
    pub tol: f64,
    /// Smallest admissible inverse condition number of `A` along `σ`.
    pub min_rcond: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { grid: 512, line_range: (-std::f64::consts::PI, std::f64::consts::PI), tol: 1e-9, min_rcond: 1e-10 }
    }
}

/// Components of a full model before validation. Every `q`-expression is
/// in the variables `q1..qn` (see [`FullModel::q_vars`]); `sigma` is in `s`.
#[derive(Debug, Clone)]
pub struct FullModelParts {
    pub d: Vec<Vec<Expr>>,
    pub p: Expr,
    pub b: Vec<Vec<Expr>>,
    pub bperp: Vec<Expr>,
    pub h: Vec<Expr>,
    pub sigma: Vec<Expr>,
    pub topology: Topology,
}

/// A validated Lagrangian control system `D q̈ + C q̇ + ∇P = B τ` with VHC
/// `h(q) = 0` parametrized by `q = σ(s)`.
#[derive(Debug, Clone)]
pub struct FullModel {
    n: usize,
    parts: FullModelParts,
    /// `dd[k][i][j] = ∂D_ij/∂q_k`
    dd: Vec<Vec<Vec<Expr>>>,
    grad_p: Vec<Expr>,
    /// `dh[r][i] = ∂h_r/∂q_i`
    dh: Vec<Vec<Expr>>,
    hess_h: Vec<Vec<Vec<Expr>>>,
    dsigma: Vec<Expr>,
    ddsigma: Vec<Expr>,
    sample_range: (f64, f64),
}

/// `A(q)` with a 2-norm condition estimate.
#[derive(Debug, Clone)]
pub struct Decoupling {
    pub a: DMatrix<f64>,
    pub cond: f64,
}

fn cond_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 && min.is_finite() { max / min } else { f64::INFINITY }
}

fn eval_vec(es: &[Expr], x: &[f64]) -> Result<DVector<f64>, ExprError> {
    let v: Result<Vec<f64>, _> = es.iter().map(|e| e.eval(x)).collect();
    Ok(DVector::from_vec(v?))
}

fn eval_mat(es: &[Vec<Expr>], x: &[f64]) -> Result<DMatrix<f64>, ExprError> {
    let rows = es.len();
    let cols = es.first().map_or(0, |r| r.len());
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in es.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = e.eval(x)?;
        }
    }
    Ok(m)
}

impl FullModel {
    pub fn q_vars(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("q{i}")).collect()
    }

    pub fn new(parts: FullModelParts, opts: &ValidationOptions) -> Result<Self, ReductionError> {
        let model = Self::build(parts, opts)?;
        model.validate(opts)?;
        Ok(model)
    }

    /// Dimension checks and symbolic derivatives, without the grid checks.
    fn build(parts: FullModelParts, opts: &ValidationOptions) -> Result<Self, ReductionError> {
        let n = parts.sigma.len();
        if n < 2 {
            return Err(ReductionError::Dimension("need at least two degrees of freedom".into()));
        }
        let qv = Self::q_vars(n);
        let check_q = |e: &Expr, what: &str| -> Result<(), ReductionError> {
            if e.vars() != qv.as_slice() {
                return Err(ReductionError::Dimension(format!("{what} must be an expression in q1..q{n}")));
            }
            Ok(())
        };
        let dim = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(ReductionError::Dimension(msg.to_string())) };
        dim(parts.d.len() == n && parts.d.iter().all(|r| r.len() == n), "D must be n x n")?;
        dim(parts.b.len() == n && parts.b.iter().all(|r| r.len() == n - 1), "B must be n x (n-1)")?;
        dim(parts.bperp.len() == n, "Bperp must have n entries")?;
        dim(parts.h.len() == n - 1, "h must have n-1 entries")?;
        for e in parts.d.iter().flatten() {
            check_q(e, "D")?;
        }
        for e in parts.b.iter().flatten() {
            check_q(e, "B")?;
        }
        for e in &parts.bperp {
            check_q(e, "Bperp")?;
        }
        for e in &parts.h {
            check_q(e, "h")?;
        }
        check_q(&parts.p, "P")?;
        for e in &parts.sigma {
            if e.vars() != ["s".to_string()] {
                return Err(ReductionError::Dimension("sigma must be an expression in s".into()));
            }
        }
        let sample_range = match parts.topology {
            Topology::Line => opts.line_range,
            Topology::Circle { period } => {
                if !(period.is_finite() && period > 0.0) {
                    return Err(ReductionError::BadPeriod(period));
                }
                (0.0, period)
            }
        };

        let dd = (0..n)
            .map(|k| parts.d.iter().map(|row| row.iter().map(|e| e.derivative(k)).collect()).collect())
            .collect();
        let grad_p = (0..n).map(|i| parts.p.derivative(i)).collect();
        let dh: Vec<Vec<Expr>> = parts.h.iter().map(|h| (0..n).map(|i| h.derivative(i)).collect()).collect();
        let hess_h = dh.iter().map(|row| row.iter().map(|e| (0..n).map(|j| e.derivative(j)).collect()).collect()).collect();
        let dsigma: Vec<Expr> = parts.sigma.iter().map(|e| e.derivative(0)).collect();
        let ddsigma = dsigma.iter().map(|e| e.derivative(0)).collect();
        Ok(FullModel { n, parts, dd, grad_p, dh, hess_h, dsigma, ddsigma, sample_range })
    }

    fn validate(&self, opts: &ValidationOptions) -> Result<(), ReductionError> {
        let n = self.n;
        let tol = opts.tol;
        let mut prev_det = None;
        for s in self.grid(opts.grid) {
            let q = self.sigma(s)?;
            let d = eval_mat(&self.parts.d, q.as_slice())?;
            let dscale = d.amax().max(1.0);
            let gap = (&d - d.transpose()).amax();
            if gap > tol * dscale {
                return Err(ReductionError::NotSymmetric { s, gap });
            }
            if d.clone().cholesky().is_none() {
                return Err(ReductionError::NotPositiveDefinite { s });
            }
            let b = eval_mat(&self.parts.b, q.as_slice())?;
            let bp = eval_vec(&self.parts.bperp, q.as_slice())?;
            let prod = bp.transpose() * &b;
            let residual = prod.amax();
            if residual > tol * (bp.norm() * b.norm()).max(1.0) {
                return Err(ReductionError::NotAnnihilator { s, residual });
            }
            for h in &self.parts.h {
                let value = h.eval(q.as_slice())?;
                if value.abs() > tol {
                    return Err(ReductionError::ConstraintViolated { s, value });
                }
            }
            let ds = eval_vec(&self.dsigma, &[s])?;
            if ds.norm() <= 1e-12 {
                return Err(ReductionError::IrregularParametrization { s });
            }
            let a = self.decoupling_matrix(q.as_slice())?;
            let det = a.a.determinant();
            // a sign change of det A between grid points means a singular point in between
            let flipped = prev_det.is_some_and(|p: f64| p * det < 0.0);
            prev_det = Some(det);
            if !(a.cond.is_finite() && 1.0 / a.cond > opts.min_rcond) || a.a.amax() <= 1e-14 * n as f64 || flipped {
                return Err(ReductionError::SingularDecoupling { s, cond: a.cond });
            }
        }
        Ok(())
    }

    /// Uniform parameter grid (endpoint excluded on circles).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.sample_range;
        match self.parts.topology {
            Topology::Circle { .. } => (0..n).map(|k| a + (b - a) * k as f64 / n as f64).collect(),
            Topology::Line => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1).max(1) as f64).collect(),
        }
    }

    pub fn dof(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &FullModelParts {
        &self.parts
    }

    pub fn topology(&self) -> Topology {
        self.parts.topology
    }

    pub fn sigma(&self, s: f64) -> Result<DVector<f64>, ExprError> {
        eval_vec(&self.parts.sigma, &[s])
    }

    pub fn sigma_prime(&self, s: f64) -> Result<DVector<f64>, ExprError> {
        eval_vec(&self.dsigma, &[s])
    }

    pub fn mass(&self, q: &[f64]) -> Result<DMatrix<f64>, ExprError> {
        eval_mat(&self.parts.d, q)
    }

    pub fn potential(&self, q: &[f64]) -> Result<f64, ExprError> {
        self.parts.p.eval(q)
    }

    pub fn grad_potential(&self, q: &[f64]) -> Result<DVector<f64>, ExprError> {
        eval_vec(&self.grad_p, q)
    }

    pub fn input_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>, ExprError> {
        eval_mat(&self.parts.b, q)
    }

    pub fn annihilator(&self, q: &[f64]) -> Result<DVector<f64>, ExprError> {
        eval_vec(&self.parts.bperp, q)
    }

    pub fn constraint(&self, q: &[f64]) -> Result<DVector<f64>, ExprError> {
        eval_vec(&self.parts.h, q)
    }

    pub fn constraint_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>, ExprError> {
        eval_mat(&self.dh, q)
    }

    /// `C(q, q̇) q̇` from Christoffel symbols of the first kind.
    pub fn coriolis(&self, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>, ExprError> {
        let n = self.n;
        let mut dd = vec![vec![vec![0.0; n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    dd[k][i][j] = self.dd[k][i][j].eval(q)?;
                }
            }
        }
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += 0.5 * (dd[k][i][j] + dd[j][i][k] - dd[i][j][k]) * qdot[j] * qdot[k];
                }
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `A(q) = dh_q D⁻¹(q) B(q)`.
    pub fn decoupling_matrix(&self, q: &[f64]) -> Result<Decoupling, ReductionError> {
        let d = self.mass(q)?;
        let b = self.input_matrix(q)?;
        let dh = self.constraint_jacobian(q)?;
        let lu = d.lu();
        let dinv_b = lu.solve(&b).ok_or(ReductionError::SingularMass)?;
        let a = dh * dinv_b;
        let cond = cond_estimate(&a);
        Ok(Decoupling { a, cond })
    }

    /// Symbolic reduction to `(Ψ₁, Ψ₂)`; the denominator `B⊥Dσ′` is checked
    /// on a grid of `grid` points.
    pub fn reduce_with_grid(&self, grid: usize) -> Result<ReducedDynamics, ReductionError> {
        let n = self.n;
        let sv = ["s"];
        let sig: &Vec<Expr> = &self.parts.sigma.iter().map(|e| e.simplify()).collect();
        let at_sigma = |e: &Expr| e.compose(sig);
        let bp: Vec<Expr> = self.parts.bperp.iter().map(at_sigma).collect();
        let d: Vec<Vec<Expr>> = self.parts.d.iter().map(|r| r.iter().map(at_sigma).collect()).collect();
        let gp: Vec<Expr> = self.grad_p.iter().map(at_sigma).collect();
        let ds = &self.dsigma;
        let dds = &self.ddsigma;

        let dot = |a: &[Expr], b: &[Expr]| {
            let terms: Vec<Expr> = a.iter().zip(b).map(|(x, y)| x.mul(y)).collect();
            Expr::sum(&terms, &sv)
        };
        let mat_vec = |m: &[Vec<Expr>], v: &[Expr]| -> Vec<Expr> { m.iter().map(|row| dot(row, v)).collect() };

        let den = dot(&bp, &mat_vec(&d, ds));
        let num1 = dot(&bp, &gp);
        let mut num2_terms = vec![dot(&bp, &mat_vec(&d, dds))];
        for i in 0..n {
            // (Q_i)_jk = ½(∂_k D_ij + ∂_j D_ik − ∂_i D_kj)
            let mut quad = Vec::new();
            for j in 0..n {
                for k in 0..n {
                    let q = self.dd[k][i][j].add(&self.dd[j][i][k]).sub(&self.dd[i][k][j]);
                    let q = at_sigma(&q);
                    if q.as_constant() == Some(0.0) {
                        continue;
                    }
                    quad.push(q.scale(0.5).mul(&ds[j]).mul(&ds[k]));
                }
            }
            num2_terms.push(bp[i].mul(&Expr::sum(&quad, &sv)));
        }
        let num2 = Expr::sum(&num2_terms, &sv);

        let (a, b) = self.sample_range;
        let mut prev: Option<f64> = None;
        for k in 0..=grid {
            let s = a + (b - a) * k as f64 / grid as f64;
            let v = den.eval(&[s])?;
            let scale = self.annihilator(self.sigma(s)?.as_slice())?.norm() * self.sigma_prime(s)?.norm();
            if !(v.abs() > 1e-12 * scale.max(1e-300)) || prev.is_some_and(|p| p * v < 0.0) {
                return Err(ReductionError::SingularReduction { s });
            }
            prev = Some(v);
        }
        let psi1 = num1.div(&den).neg();
        let psi2 = num2.div(&den).neg();
        ReducedDynamics::new(ScalarFn::expr(psi1), ScalarFn::expr(psi2), self.parts.topology)
    }

    pub fn reduce(&self) -> Result<ReducedDynamics, ReductionError> {
        self.reduce_with_grid(512)
    }

    /// Parameter of the point of `σ` closest to `q`: grid search, then Newton
    /// on `(σ(s) − q)·σ′(s) = 0`.
    pub fn project(&self, q: &[f64]) -> Result<f64, ExprError> {
        let qv = DVector::from_column_slice(q);
        let mut best = (f64::INFINITY, 0.0);
        for s in self.grid(512) {
            let d = (self.sigma(s)? - &qv).norm_squared();
            if d < best.0 {
                best = (d, s);
            }
        }
        self.project_near(q, best.1)
    }

    /// Newton refinement of the projection from an initial guess.
    pub fn project_near(&self, q: &[f64], s0: f64) -> Result<f64, ExprError> {
        let qv = DVector::from_column_slice(q);
        let mut s = s0;
        for _ in 0..20 {
            let r = self.sigma(s)? - &qv;
            let d1 = self.sigma_prime(s)?;
            let d2 = eval_vec(&self.ddsigma, &[s])?;
            let g = r.dot(&d1);
            let dg = d1.dot(&d1) + r.dot(&d2);
            if dg <= 0.0 {
                break;
            }
            let step = g / dg;
            s -= step;
            if step.abs() < 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        Ok(s)
    }
}
