//! The attracting closed orbit `ṡ = ν(s)` of a non-Lagrangian system and the
//! exponential rate at which a transient approaches it.

use vhc::analysis::VirtualPair;
use vhc::dynamics::{limit_cycle, LimitCycleOptions};
use vhc::fixtures;

fn main() {
    let rd = fixtures::EXAMPLE_4.model().reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    let lc = limit_cycle(&rd, &vp, &LimitCycleOptions::default()).expect("sign hypotheses hold");
    println!("invariance residual {:.1e}, seam error {:.1e}", lc.residual_sup, lc.seam_error);
    for k in (0..lc.xs.len()).step_by(lc.xs.len() / 8) {
        println!("  ν({:.4}) = {:+.6}", lc.xs[k], lc.nu[k]);
    }
    if let Some(r) = lc.rate {
        println!("decay rate {:.4} (R² {:.4}, {} points on [{:.2}, {:.2}])", r.rate, r.r2, r.points, r.t_start, r.t_end);
    }
}
