//! Virtual mass and potential boundary values and the Lagrangian verdict for
//! every bundled model.

use vhc::analysis::{classify, ClassifyOptions, VirtualPair};
use vhc::fixtures;

fn main() {
    println!("{:<10} {:>14} {:>12} {:>16}", "model", "M(T)", "V(T)", "kind");
    for fx in fixtures::ALL {
        let rd = fx.model().reduced().unwrap();
        let vp = VirtualPair::with_defaults(&rd).unwrap();
        let c = classify(&vp, &ClassifyOptions::default());
        println!("{:<10} {:>14.6e} {:>12.6} {:>16}", fx.name, vp.mt(), vp.vt(), c.kind.as_str());
    }
}
