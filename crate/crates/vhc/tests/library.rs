use std::f64::consts::{PI, TAU};

use vhc::analysis::VirtualPair;
use vhc::fixtures;
use vhc::lagrangian::{fresnel_c, fresnel_s};
use vhc::model::Model;
use vhc::reduction::particle::{particle, ParticleParams};

/// Composite Simpson on `[0, x]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, x: f64, n: usize) -> f64 {
    let h = x / n as f64;
    let mut s = f(0.0) + f(x);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(h * k as f64);
    }
    s * h / 3.0
}

#[test]
fn fresnel_against_quadrature() {
    for &x in &[0.3, 1.0, 2.5, 4.0, -1.7] {
        let c = simpson(|t| (0.5 * PI * t * t).cos(), x, 20_000);
        let s = simpson(|t| (0.5 * PI * t * t).sin(), x, 20_000);
        assert!((fresnel_c(x) - c).abs() < 1e-10, "C({x})");
        assert!((fresnel_s(x) - s).abs() < 1e-10, "S({x})");
    }
}

#[test]
fn particle_files_match_the_builder() {
    for (case, fx) in [(1, &fixtures::PARTICLE_1), (2, &fixtures::PARTICLE_2), (3, &fixtures::PARTICLE_3), (4, &fixtures::PARTICLE_4)] {
        let from_file = fx.model().reduced().unwrap();
        let built = particle(&ParticleParams::case(case).unwrap()).unwrap().reduce().unwrap();
        for i in 0..64 {
            let s = TAU * i as f64 / 64.0;
            assert!((from_file.psi1(s) - built.psi1(s)).abs() < 1e-12, "case {case}");
            assert!((from_file.psi2(s) - built.psi2(s)).abs() < 1e-12, "case {case}");
        }
    }
}

#[test]
fn lifted_pair_matches_marching_quadrature() {
    // Example 1 has closed forms; compare off the base interval
    let rd = fixtures::EXAMPLE_1.model().reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    for k in 0..20 {
        let x = -3.0 * TAU + 6.0 * TAU * (k as f64 + 0.37) / 20.0;
        let c = x.cos();
        assert!((vp.eval_m(x) - 9.0 / (c + 2.0).powi(2)).abs() < 1e-7);
        assert!((vp.eval_v(x) - (4.0 - 18.0 * (c + 1.0) / (c + 2.0).powi(2))).abs() < 1e-7);
        let (m, v) = vp.direct(x).unwrap();
        assert!((m - vp.eval_m(x)).abs() < 1e-7 && (v - vp.eval_v(x)).abs() < 1e-7);
    }
}

#[test]
fn model_files_reject_bad_input() {
    let bad = [
        "[reduced]\npsi1 = \"1\"\npsi2 = \"0\"\ntopology = \"circle\"\n",
        "[reduced]\npsi1 = \"1\"\npsi2 = \"0\"\ntopology = \"line\"\nperiod = 1\n",
        "[reduced]\npsi1 = \"1\"\ntopology = \"line\"\n",
        "[reduced]\npsi1 = \"1 +\"\npsi2 = \"0\"\ntopology = \"line\"\n",
        "[reduced]\npsi1 = \"q\"\npsi2 = \"0\"\ntopology = \"line\"\n",
        "[reduced]\npsi1 = \"1\"\npsi2 = \"0\"\ntopology = \"torus\"\n",
        "[reduced]\npsi1 = \"1\"\npsi2 = \"0\"\ntopology = \"line\"\nextra = 1\n",
    ];
    for text in bad {
        assert!(Model::parse(text).is_err(), "accepted:\n{text}");
    }
    let ok = Model::parse("[reduced]\npsi1 = \"-s\"\npsi2 = \"0\"\ntopology = \"line\"\n").unwrap();
    assert!(!ok.is_full());
}
