//! Evaluate the virtual mass and potential beyond one period: the values on
//! `[0, T)` determine them everywhere.

use std::f64::consts::TAU;

use vhc::analysis::VirtualPair;
use vhc::fixtures;

fn main() {
    let rd = fixtures::EXAMPLE_2.model().reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    println!("M(T) = {:.3e}, V(T) = {:.6}", vp.mt(), vp.vt());
    for n in -2..=2 {
        let x = 1.0 + n as f64 * TAU;
        let (m, v) = vp.direct(x).unwrap();
        println!("x = {x:+8.4}: M = {:.10} (quadrature {m:.10}), V = {:+.8} (quadrature {v:+.8})", vp.eval_m(x), vp.eval_v(x));
    }
}
