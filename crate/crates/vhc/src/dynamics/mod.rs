//! Integration of the lifted reduced dynamics `ẍ = Ψ₁(x) + Ψ₂(x) ẋ²`,
//! orbit classification, limit cycles and phase portraits.

mod cycle;
mod orbit;
mod portrait;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::ode::{self, Dopri5Options};
use crate::reduction::ReducedDynamics;

pub use cycle::{limit_cycle, LimitCycle, LimitCycleOptions, RateFit};
pub use orbit::{classify_orbit, OrbitClass, OrbitDiagnostics, OrbitTag, OrbitThresholds};
pub use portrait::{portrait, PortraitEntry, PortraitOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("limit-cycle hypotheses do not hold: {0}")]
    Hypotheses(String),
    #[error("negative radicand for nu at x = {x}: inconsistent inputs")]
    NegativeRadicand { x: f64 },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid option: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Minimum number of uniformly spaced output samples.
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { rtol: 1e-9, atol: 1e-11, samples: 2048, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub xddot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub rtol: f64,
    pub atol: f64,
    pub termination: &'static str,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Samples on the lifted plane, with `t` strictly increasing.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub period: Option<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// `floor(x/T)` per sample (empty on a line).
    pub fn winding(&self) -> Vec<i64> {
        match self.period {
            Some(t) => self.samples.iter().map(|s| (s.x / t).floor() as i64).collect(),
            None => Vec::new(),
        }
    }

    /// Cylinder chart position `x mod T` (or `x` on a line).
    pub fn cylinder_s(&self, x: f64) -> f64 {
        match self.period {
            Some(t) => x.rem_euclid(t),
            None => x,
        }
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn completed(&self) -> bool {
        self.meta.termination == "completed"
    }

    /// `(x, ẋ)` at time `t` by cubic Hermite interpolation between samples;
    /// `None` outside the integrated interval.
    pub fn state_at(&self, t: f64) -> Option<(f64, f64)> {
        let s = &self.samples;
        if !(t >= s[0].t && t <= self.last().t) {
            return None;
        }
        let i = s.partition_point(|p| p.t <= t);
        if i == s.len() {
            return Some((self.last().x, self.last().xdot));
        }
        let (a, b) = (&s[i - 1], &s[i]);
        Some((
            orbit::hermite(t, (a.t, a.x, a.xdot), (b.t, b.x, b.xdot)),
            orbit::hermite(t, (a.t, a.xdot, a.xddot), (b.t, b.xdot, b.xddot)),
        ))
    }
}

/// Integrates the lifted dynamics from `(x0, ẋ0)` over `[0, horizon]`.
/// On a circle accepted steps move `x` by less than `T/8`. A finite-time
/// blow-up truncates the trajectory and is reported in `meta.termination`.
pub fn integrate(rd: &ReducedDynamics, x0: f64, xdot0: f64, horizon: f64, opts: &IntegrateOptions) -> Trajectory {
    assert!(horizon > 0.0, "horizon must be positive");
    let period = rd.period();
    let max_dx = period.map_or(f64::INFINITY, |t| t / 8.0);
    let ode_opts = Dopri5Options { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps, ..Default::default() };
    let sample = |t: f64, x: f64, v: f64| Sample { t, x, xdot: v, xddot: rd.accel(x, v) };
    let mut samples = vec![sample(0.0, x0, xdot0)];
    let n_out = opts.samples.max(2);
    let dt = horizon / n_out as f64;
    let mut next = 1usize;
    let mut buf = [0.0; 2];
    let (term, stats) = ode::integrate(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = rd.accel(y[0], y[1]);
        },
        0.0,
        &[x0, xdot0],
        horizon,
        &ode_opts,
        |a, b| (b[0] - a[0]).abs() < max_dx,
        |step, y, _| {
            let t1 = step.t1();
            while next <= n_out {
                let t = dt * next as f64;
                if t >= t1 {
                    break;
                }
                step.eval_into(t, &mut buf);
                if t > samples.last().unwrap().t {
                    samples.push(sample(t, buf[0], buf[1]));
                }
                next += 1;
            }
            if t1 > samples.last().unwrap().t {
                samples.push(sample(t1, y[0], y[1]));
            }
            // a uniform time that coincides with the step end is already recorded
            if (next as f64) * dt <= t1 {
                next += 1;
            }
            true
        },
    );
    Trajectory {
        samples,
        period,
        meta: TrajectoryMeta {
            rtol: opts.rtol,
            atol: opts.atol,
            termination: term.label(),
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
        },
    }
}
