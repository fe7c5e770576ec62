//! Simulate the full particle model under the constraint-enforcing feedback
//! and compare it with the reduced dynamics.

use vhc::dynamics::{integrate, IntegrateOptions};
use vhc::reduction::particle::{particle, ParticleParams};
use vhc::reduction::SimulateOptions;

fn main() {
    let full = particle(&ParticleParams::case(3).unwrap()).unwrap();
    let rd = full.reduce().unwrap();
    let (s0, v0) = (0.3, 0.8);
    let q0 = full.sigma(s0).unwrap();
    let dq0 = full.sigma_prime(s0).unwrap() * v0;
    let opts = SimulateOptions { horizon: 10.0, ..Default::default() };

    // on the constraint manifold the projection follows the reduced motion
    let tr = full.simulate_full(q0.as_slice(), dq0.as_slice(), &opts).unwrap();
    let s = tr.projected_s(&full).unwrap();
    let red = integrate(&rd, s0, v0, opts.horizon, &IntegrateOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() });
    for k in (0..tr.samples.len()).step_by(tr.samples.len() / 8) {
        let smp = &tr.samples[k];
        let (x, _) = red.state_at(smp.t).unwrap();
        println!("t = {:6.3}: s = {:+.8}, reduced s = {:+.8}", smp.t, s[k], x);
    }

    // off the manifold the feedback drives the constraint error to zero
    let q1: Vec<f64> = q0.iter().map(|q| q * 1.01).collect();
    let tr = full.simulate_full(&q1, dq0.as_slice(), &opts).unwrap();
    for k in (0..tr.samples.len()).step_by(tr.samples.len() / 5) {
        println!("perturbed start, t = {:6.3}: constraint error {:.2e}", tr.samples[k].t, tr.samples[k].constraint_error);
    }
}
