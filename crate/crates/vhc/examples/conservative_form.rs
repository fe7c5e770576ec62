//! Change coordinates so that the virtual mass becomes 1 and the velocity
//! term disappears, keeping the classification.

use std::f64::consts::TAU;

use vhc::analysis::{classify, ClassifyOptions, VirtualPair};
use vhc::fixtures;
use vhc::xform::{conservative_form, XformOptions};

fn main() {
    for fx in [&fixtures::EXAMPLE_1, &fixtures::EXAMPLE_2] {
        let rd = fx.model().reduced().unwrap();
        let vp = VirtualPair::with_defaults(&rd).unwrap();
        let (rd2, d) = conservative_form(&rd, &vp, TAU, &XformOptions::default()).unwrap();
        let vp2 = VirtualPair::with_defaults(&rd2).unwrap();
        let sup_psi2 = (0..1000).map(|k| rd2.psi2(TAU * k as f64 / 1000.0).abs()).fold(0.0, f64::max);
        println!(
            "{}: φ(π) = {:.6}, sup|Ψ₂| = {sup_psi2:.1e}, M(T) = {:.12}, {} → {}",
            fx.name,
            d.phi(std::f64::consts::PI),
            vp2.mt(),
            classify(&vp, &ClassifyOptions::default()).kind.as_str(),
            classify(&vp2, &ClassifyOptions::default()).kind.as_str(),
        );
    }
}
