//! Build the Fresnel-type Lagrangian of a system that is Lagrangian but not
//! mechanical, and check that its Euler–Lagrange expression vanishes along
//! the dynamics.

use vhc::analysis::{classify, ClassifyOptions, VirtualPair};
use vhc::fixtures;
use vhc::lagrangian::synthesize;

fn main() {
    let rd = fixtures::EXAMPLE_2.model().reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    let cls = classify(&vp, &ClassifyOptions::default());
    let h = synthesize(&cls, &vp).expect("SEL systems have a Lagrangian");
    println!("kind {}, handle {:?}", cls.kind.as_str(), h.descriptor());
    for &(x, v) in &[(0.3, 0.5), (2.0, -1.2), (5.5, 1.8)] {
        let a = rd.accel(x, v);
        println!(
            "x = {x}, ẋ = {v}: L = {:+.6}, α = {:+.6}, residual on solution = {:.1e}, residual at ẍ + 1 = {:+.6}",
            h.eval(x, v),
            h.alpha(x, v),
            h.el_residual(&rd, x, v, a),
            h.el_residual(&rd, x, v, a + 1.0),
        );
    }
}
