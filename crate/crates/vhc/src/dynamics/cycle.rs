//! The periodic orbit `ṡ = ν(s)` of non-Lagrangian reduced dynamics.

use serde::Serialize;

use super::{integrate, DynamicsError, IntegrateOptions};
use crate::analysis::{limit_cycle_hypotheses, VirtualPair};
use crate::interp::PeriodicSamples;
use crate::reduction::ReducedDynamics;

#[derive(Debug, Clone, Copy)]
pub struct LimitCycleOptions {
    /// Initial state of the transient used for the rate fit.
    pub transient: (f64, f64),
    pub horizon: f64,
    pub integrate: IntegrateOptions,
    /// Distances below this are treated as converged and left out of the fit.
    pub fit_floor: f64,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        LimitCycleOptions {
            transient: (0.0, 0.0),
            horizon: 20.0,
            integrate: IntegrateOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() },
            fit_floor: 1e-8,
        }
    }
}

/// Least-squares fit `ln|ẋ − ν(x)| ≈ c − rate·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub r2: f64,
    pub points: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone)]
pub struct LimitCycle {
    /// Grid `x_k = kT/N`, `k = 0..=N`.
    pub xs: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_prime: Vec<f64>,
    pub residual_sup: f64,
    pub seam_error: f64,
    pub rate: Option<RateFit>,
    interp: PeriodicSamples,
}

impl LimitCycle {
    /// `ν(x)` for any real `x` (periodic interpolation).
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    pub fn period(&self) -> f64 {
        self.interp.period()
    }

    /// `|ẋ − ν(x)|`.
    pub fn distance(&self, x: f64, xdot: f64) -> f64 {
        (xdot - self.eval(x)).abs()
    }
}

// sixth-order central difference weights for offsets 1, 2, 3
const FD6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

fn periodic_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut d = 0.0;
            for (j, w) in FD6.iter().enumerate() {
                let o = j + 1;
                d += w * (v[(i + o) % n] - v[(i + n - o) % n]);
            }
            d / h
        })
        .collect()
}

/// Computes `ν` on the pair's grid, its invariance residual and the
/// convergence rate of one transient.
///
/// With `M_k = exp(−2I₂(x_k))` and cell integrals `q_k`,
/// `ν²(x_j) = 2 J_j / (M̃(T) − 1)` where
/// `J_j = Σ_{k≥j} q_k M_k/M_j + M̃(T) Σ_{k<j} q_k M_k/M_j`; this equals
/// `−2[Ṽ(x+T) − Ṽ(x)] / (M̃(x)(M̃(T)−1))` but avoids subtracting nearly equal
/// potentials where `M̃` is tiny.
pub fn limit_cycle(rd: &ReducedDynamics, vp: &VirtualPair, opts: &LimitCycleOptions) -> Result<LimitCycle, DynamicsError> {
    let Some(period) = rd.period() else {
        return Err(DynamicsError::Hypotheses("the configuration space is a line".into()));
    };
    if !limit_cycle_hypotheses(rd, vp) {
        return Err(DynamicsError::Hypotheses("Ψ₁ must have one strict sign and ∫Ψ₂ the opposite one".into()));
    }
    let mt = vp.mt();
    if (mt - 1.0).abs() <= vp.options().eps_m {
        return Err(DynamicsError::Hypotheses(format!("M(T) = {mt} is within eps_M of 1")));
    }
    let i2 = vp.grid_i2();
    let q = vp.cell_q();
    let n = q.len();
    let i2t = i2[n];
    let sign = rd.psi1(0.0).signum();
    let h = vp.step();
    let xs = vp.xs();
    let mut nu = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = 0.0;
        for k in 0..n {
            let e = if k >= j { 2.0 * (i2[j] - i2[k]) } else { 2.0 * (i2[j] - i2[k] - i2t) };
            acc += q[k] * e.exp();
        }
        let r = 2.0 * acc / (mt - 1.0);
        if r < 0.0 || !r.is_finite() {
            return Err(DynamicsError::NegativeRadicand { x: xs[j] });
        }
        nu.push(sign * r.sqrt());
    }
    let seam_error = (nu[n] - nu[0]).abs();
    let mut nu_prime = periodic_derivative(&nu[..n], h);
    nu_prime.push(nu_prime[0]);
    let residual_sup = (0..=n)
        .map(|k| (nu_prime[k] * nu[k] - rd.psi1(xs[k]) - rd.psi2(xs[k]) * nu[k] * nu[k]).abs())
        .fold(0.0, f64::max);
    let interp = PeriodicSamples::new(period, nu[..n].to_vec());
    let mut lc = LimitCycle { xs, nu, nu_prime, residual_sup, seam_error, rate: None, interp };
    lc.rate = fit_rate(rd, &lc, opts);
    Ok(lc)
}

fn fit_rate(rd: &ReducedDynamics, lc: &LimitCycle, opts: &LimitCycleOptions) -> Option<RateFit> {
    let (x0, v0) = opts.transient;
    let tr = integrate(rd, x0, v0, opts.horizon, &opts.integrate);
    let pts: Vec<(f64, f64)> = tr
        .samples
        .iter()
        .map(|s| (s.t, lc.distance(s.x, s.xdot)))
        .take_while(|&(_, d)| d > opts.fit_floor)
        .map(|(t, d)| (t, d.ln()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(RateFit {
        rate: -slope,
        r2: sxy * sxy / (sxx * syy),
        points: pts.len(),
        t_start: pts[0].0,
        t_end: pts[pts.len() - 1].0,
    })
}
