use rayon::prelude::*;

use super::{classify_orbit, integrate, IntegrateOptions, OrbitClass, OrbitThresholds, Trajectory};
use crate::reduction::ReducedDynamics;

#[derive(Debug, Clone, Copy)]
pub struct PortraitOptions {
    pub s_range: (f64, f64),
    pub sdot_range: (f64, f64),
    /// Number of initial conditions along `s` and `ṡ`.
    pub grid: (usize, usize),
    pub horizon: f64,
    pub integrate: IntegrateOptions,
    pub thresholds: OrbitThresholds,
}

#[derive(Debug, Clone)]
pub struct PortraitEntry {
    pub i: usize,
    pub j: usize,
    pub s0: f64,
    pub sdot0: f64,
    pub trajectory: Trajectory,
    pub class: OrbitClass,
}

/// Cell-centred grid coordinate `j` of `n` on `[lo, hi]`.
fn center(range: (f64, f64), j: usize, n: usize) -> f64 {
    range.0 + (range.1 - range.0) * (j as f64 + 0.5) / n as f64
}

/// Integrates and classifies every start on a cell-centred `k × m` grid, in
/// parallel. Entries are ordered by `(i, j)` whatever the completion order.
pub fn portrait(rd: &ReducedDynamics, opts: &PortraitOptions) -> Vec<PortraitEntry> {
    let (k, m) = opts.grid;
    assert!(k > 0 && m > 0, "portrait grid must be nonempty");
    (0..k * m)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let s0 = center(opts.s_range, i, k);
            let sdot0 = center(opts.sdot_range, j, m);
            let trajectory = integrate(rd, s0, sdot0, opts.horizon, &opts.integrate);
            let class = classify_orbit(&trajectory, &opts.thresholds);
            PortraitEntry { i, j, s0, sdot0, trajectory, class }
        })
        .collect()
}
