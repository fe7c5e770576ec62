//! Integrate one orbit on the cylinder and classify it.

use vhc::dynamics::{classify_orbit, integrate, IntegrateOptions, OrbitThresholds};
use vhc::fixtures;

fn main() {
    let rd = fixtures::EXAMPLE_1.model().reduced().unwrap();
    for &(x0, v0) in &[(std::f64::consts::FRAC_PI_2, 0.5), (0.0, 3.0)] {
        let tr = integrate(&rd, x0, v0, 40.0, &IntegrateOptions::default());
        let c = classify_orbit(&tr, &OrbitThresholds::default());
        let end = tr.last();
        println!(
            "start ({x0}, {v0}): {} — {} returns, closure {}, ends at s = {:.4}, ṡ = {:+.4} ({})",
            c.tag.as_str(),
            c.diagnostics.returns,
            c.diagnostics.closure_error.map_or("n/a".to_string(), |e| format!("{e:.1e}")),
            tr.cylinder_s(end.x),
            end.xdot,
            tr.meta.termination,
        );
    }
}
