//! Reduced dynamics of the planar particle under the circle constraint, for
//! the four bundled parameter sets.

use std::f64::consts::TAU;

use vhc::reduction::particle::{particle, ParticleParams};

fn main() {
    for case in 1..=4 {
        let p = ParticleParams::case(case).unwrap();
        let rd = particle(&p).unwrap().reduce().unwrap();
        println!("case {case}: a = {:?}, b = {:?}, θ = {:.4}", p.a, p.b, p.theta);
        for k in 0..4 {
            let s = TAU * k as f64 / 4.0;
            println!("  s = {s:.4}: Ψ₁ = {:+.6}, Ψ₂ = {:+.6}", rd.psi1(s), rd.psi2(s));
        }
    }
}
