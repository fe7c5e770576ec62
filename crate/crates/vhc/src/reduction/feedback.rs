//! Input–output linearizing feedback enforcing `h(q) = 0`, and closed-loop
//! simulation of the full model.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use super::{eval_mat, FullModel, ReductionError};
use crate::ode::{self, Dopri5Options, Termination};

impl FullModel {
    /// `μ(q, q̇) = −dh D⁻¹(C q̇ + ∇P) + [q̇ᵀ ∇²h_r q̇]_r`, so that `ë = A τ + μ`.
    pub fn drift(&self, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>, ReductionError> {
        let d = self.mass(q)?;
        let rhs = self.coriolis(q, qdot)? + self.grad_potential(q)?;
        let w = d.lu().solve(&rhs).ok_or(ReductionError::SingularMass)?;
        let dh = self.constraint_jacobian(q)?;
        let qd = DVector::from_column_slice(qdot);
        let mut mu = -(dh * w);
        for (r, hess) in self.hess_h.iter().enumerate() {
            let h = eval_mat(hess, q)?;
            mu[r] += qd.dot(&(h * &qd));
        }
        Ok(mu)
    }

    /// `τ = A⁻¹(q)[−μ − k₁ e − k₂ ė]` with `e = h(q)`, `ė = dh_q q̇`.
    pub fn vhc_feedback(&self, k1: f64, k2: f64, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>, ReductionError> {
        let dec = self.decoupling_matrix(q)?;
        if !(dec.cond.is_finite() && dec.cond < 1e12) {
            return Err(ReductionError::SingularDecouplingAt { cond: dec.cond });
        }
        let e = self.constraint(q)?;
        let edot = self.constraint_jacobian(q)? * DVector::from_column_slice(qdot);
        let mu = self.drift(q, qdot)?;
        let rhs = -mu - e * k1 - edot * k2;
        dec.a.lu().solve(&rhs).ok_or(ReductionError::SingularDecouplingAt { cond: dec.cond })
    }

    /// Closed-loop accelerations `q̈ = D⁻¹(B τ − C q̇ − ∇P)`.
    pub fn closed_loop_accel(&self, k1: f64, k2: f64, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>, ReductionError> {
        let tau = self.vhc_feedback(k1, k2, q, qdot)?;
        let rhs = self.input_matrix(q)? * tau - self.coriolis(q, qdot)? - self.grad_potential(q)?;
        self.mass(q)?.lu().solve(&rhs).ok_or(ReductionError::SingularMass)
    }

    /// Integrates the closed loop from `(q0, qdot0)` over `[0, horizon]`.
    pub fn simulate_full(
        &self,
        q0: &[f64],
        qdot0: &[f64],
        opts: &SimulateOptions,
    ) -> Result<FullTrajectory, ReductionError> {
        let n = self.n;
        assert!(q0.len() == n && qdot0.len() == n, "initial state must have n components");
        let singular = Cell::new(false);
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[..n].copy_from_slice(&y[n..]);
            match self.closed_loop_accel(opts.k1, opts.k2, &y[..n], &y[n..]) {
                Ok(a) => dy[n..].copy_from_slice(a.as_slice()),
                Err(ReductionError::SingularDecouplingAt { .. }) | Err(ReductionError::SingularMass) => {
                    singular.set(true);
                    dy[n..].fill(f64::NAN);
                }
                Err(_) => dy[n..].fill(f64::NAN),
            }
        };
        let y0: Vec<f64> = q0.iter().chain(qdot0).copied().collect();
        let ode_opts = Dopri5Options { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
        let mut times: Vec<f64> = Vec::new();
        let mut states: Vec<Vec<f64>> = vec![y0.clone()];
        times.push(0.0);
        let n_out = opts.samples.max(2);
        let dt_out = opts.horizon / n_out as f64;
        let mut next_out = 1usize;
        let (term, _) = ode::integrate(rhs, 0.0, &y0, opts.horizon, &ode_opts, |_, _| true, |step, y, _| {
            while next_out <= n_out {
                let t = dt_out * next_out as f64;
                if t >= step.t1() {
                    break;
                }
                times.push(t);
                states.push(step.eval(t));
                next_out += 1;
            }
            times.push(step.t1());
            states.push(y.to_vec());
            true
        });
        let t_last = *times.last().unwrap();
        match term {
            Termination::Completed => {}
            _ if singular.get() => return Err(ReductionError::SingularDecouplingAt { cond: f64::INFINITY }),
            other => return Err(ReductionError::Integration { t: t_last, reason: other.label() }),
        }
        let mut samples = Vec::with_capacity(times.len());
        for (t, y) in times.into_iter().zip(states) {
            let q = &y[..n];
            let qd = &y[n..];
            let e = self.constraint(q)?;
            let edot = self.constraint_jacobian(q)? * DVector::from_column_slice(qd);
            let err = (e.norm_squared() + edot.norm_squared()).sqrt();
            samples.push(FullSample { t, q: q.to_vec(), qdot: qd.to_vec(), constraint_error: err, e: e.as_slice().to_vec() });
        }
        Ok(FullTrajectory { samples })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions {
    pub k1: f64,
    pub k2: f64,
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Uniform output samples in addition to the step endpoints.
    pub samples: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions { k1: 4.0, k2: 4.0, horizon: 10.0, rtol: 1e-10, atol: 1e-12, samples: 2048 }
    }
}

#[derive(Debug, Clone)]
pub struct FullSample {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub e: Vec<f64>,
    /// `‖(e, ė)‖`
    pub constraint_error: f64,
}

#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub samples: Vec<FullSample>,
}

impl FullTrajectory {
    /// Lifted constraint parameter along the trajectory (projection onto `σ`,
    /// unwrapped across the seam).
    pub fn projected_s(&self, model: &FullModel) -> Result<Vec<f64>, ReductionError> {
        let period = model.topology().period();
        let mut out: Vec<f64> = Vec::with_capacity(self.samples.len());
        for smp in &self.samples {
            let s = match out.last() {
                None => model.project(&smp.q)?,
                Some(&prev) => {
                    let s = model.project_near(&smp.q, prev)?;
                    match period {
                        Some(t) => prev + (s - prev + 0.5 * t).rem_euclid(t) - 0.5 * t,
                        None => s,
                    }
                }
            };
            out.push(s);
        }
        Ok(out)
    }

    pub fn max_constraint_error(&self) -> f64 {
        self.samples.iter().map(|s| s.constraint_error).fold(0.0, f64::max)
    }
}

/// `B⊥(q)(D q̈ + C q̇ + ∇P − B τ)` at a state, with `q̈` the closed-loop
/// acceleration. Zero up to rounding by construction of `B⊥`.
pub fn annihilated_residual(model: &FullModel, k1: f64, k2: f64, q: &[f64], qdot: &[f64]) -> Result<f64, ReductionError> {
    let qdd = model.closed_loop_accel(k1, k2, q, qdot)?;
    let tau = model.vhc_feedback(k1, k2, q, qdot)?;
    let d: DMatrix<f64> = model.mass(q)?;
    let r = d * qdd + model.coriolis(q, qdot)? + model.grad_potential(q)? - model.input_matrix(q)? * tau;
    Ok(model.annihilator(q)?.dot(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::particle::{particle, ParticleParams};

    #[test]
    fn feedback_vanishes_at_rest_without_gravity() {
        let m = particle(&ParticleParams { k: 0.0, ..Default::default() }).unwrap();
        let q = m.sigma(0.4).unwrap();
        let tau = m.vhc_feedback(4.0, 4.0, q.as_slice(), &[0.0, 0.0]).unwrap();
        assert_eq!(tau.norm(), 0.0);
        let traj = m
            .simulate_full(q.as_slice(), &[0.0, 0.0], &SimulateOptions { horizon: 5.0, ..Default::default() })
            .unwrap();
        for s in &traj.samples {
            assert!((s.q[0] - q[0]).abs() < 1e-14 && (s.q[1] - q[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn constraint_holds_when_starting_on_manifold() {
        let m = particle(&ParticleParams::case(3).unwrap()).unwrap();
        let s0 = 0.3;
        let q = m.sigma(s0).unwrap();
        let qd = m.sigma_prime(s0).unwrap() * 0.5;
        let traj = m.simulate_full(q.as_slice(), qd.as_slice(), &SimulateOptions::default()).unwrap();
        assert!(traj.max_constraint_error() <= 1e-6, "{}", traj.max_constraint_error());
    }

    #[test]
    fn error_dynamics_are_critically_damped() {
        // ë + 4ė + 4e = 0 with e(0) = 0.1, ė(0) = 0: e(t) = 0.1 (1 + 2t) e^{−2t}
        let m = particle(&ParticleParams::case(2).unwrap()).unwrap();
        let s0 = 1.0;
        let on = m.sigma(s0).unwrap();
        // move radially outward by 0.1 from the circle centre b = (0.25, 0)
        let dir = [s0.cos(), s0.sin()];
        let q0 = [on[0] + 0.1 * dir[0], on[1] + 0.1 * dir[1]];
        let traj = m.simulate_full(&q0, &[0.0, 0.0], &SimulateOptions { horizon: 8.0, ..Default::default() }).unwrap();
        let mut prev = f64::INFINITY;
        for s in &traj.samples {
            let expect = 0.1 * (1.0 + 2.0 * s.t) * (-2.0 * s.t).exp();
            assert!((s.e[0] - expect).abs() < 1e-7, "t = {}: {} vs {}", s.t, s.e[0], expect);
            assert!(s.constraint_error <= prev + 1e-12 || s.t < 0.5);
            prev = s.constraint_error;
        }
    }

    #[test]
    fn left_annihilated_dynamics_vanish() {
        let m = particle(&ParticleParams::case(3).unwrap()).unwrap();
        for &(s, v) in &[(0.1, 0.3), (2.0, -1.0), (4.5, 2.0)] {
            let q = m.sigma(s).unwrap();
            let qd = m.sigma_prime(s).unwrap() * v;
            let r = annihilated_residual(&m, 4.0, 4.0, q.as_slice(), qd.as_slice()).unwrap();
            assert!(r.abs() < 1e-12, "{r}");
        }
    }
}
