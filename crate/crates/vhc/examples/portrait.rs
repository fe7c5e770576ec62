//! Phase portrait tally on a grid of initial conditions (computed in
//! parallel).

use std::f64::consts::TAU;

use vhc::dynamics::{portrait, IntegrateOptions, OrbitThresholds, PortraitOptions};
use vhc::fixtures;

fn main() {
    let rd = fixtures::EXAMPLE_2.model().reduced().unwrap();
    let opts = PortraitOptions {
        s_range: (0.0, TAU),
        sdot_range: (-3.0, 3.0),
        grid: (10, 10),
        horizon: 100.0,
        integrate: IntegrateOptions::default(),
        thresholds: OrbitThresholds::default(),
    };
    let entries = portrait(&rd, &opts);
    for j in (0..10).rev() {
        let row: String = (0..10)
            .map(|i| match entries[i * 10 + j].class.tag.as_str() {
                "rotation" => 'R',
                "oscillation" => 'o',
                "helix" => 'H',
                "equilibrium" => '.',
                "limit_cycle_convergent" => 'L',
                _ => '?',
            })
            .collect();
        println!("ṡ₀ = {:+.2}  {row}", entries[j].sdot0);
    }
}
