use std::f64::consts::TAU;

use proptest::prelude::*;

use vhc::analysis::{classify, ClassifyOptions, Kind, PairOptions, VirtualPair};
use vhc::dynamics::{integrate, IntegrateOptions};
use vhc::expr::Expr;
use vhc::fixtures;
use vhc::lagrangian::synthesize;
use vhc::reduction::{ReducedDynamics, Topology};
use vhc::xform::{transform, CircleDiffeo, XformOptions};

fn circle(p1: &str, p2: &str) -> ReducedDynamics {
    ReducedDynamics::from_exprs(p1, p2, Topology::Circle { period: TAU }).unwrap()
}

fn coarse(rd: &ReducedDynamics) -> VirtualPair {
    VirtualPair::new(rd, &PairOptions { n: 256, ..Default::default() }).unwrap()
}

fn poly(coeffs: &[f64]) -> String {
    coeffs.iter().enumerate().map(|(k, c)| format!("({c})*s^{k}")).collect::<Vec<_>>().join(" + ")
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn canonical_form_reparses_to_the_same_bits(
        a in -3.0..3.0f64, b in 0.1..2.0f64, c in -2.0..2.0f64, x in -4.0..4.0f64,
    ) {
        let src = format!("{a}*sin({b}*s)^2 - exp(-s/{b})/(2 + cos(s)) + atan({c}*s) - sqrt(abs(s) + 1)^3");
        let e = Expr::parse(&src, &["s"]).unwrap();
        let back = Expr::parse(&e.to_canonical(), &["s"]).unwrap();
        prop_assert_eq!(e.eval(&[x]).unwrap().to_bits(), back.eval(&[x]).unwrap().to_bits());
    }

    #[test]
    fn polynomial_derivative_matches_central_difference(
        coeffs in prop::collection::vec(-2.0..2.0f64, 1..6), x in -1.5..1.5f64,
    ) {
        let e = Expr::parse(&poly(&coeffs), &["s"]).unwrap();
        let d = e.differentiate("s").unwrap();
        let h = 1e-5;
        let fd = (e.eval(&[x + h]).unwrap() - e.eval(&[x - h]).unwrap()) / (2.0 * h);
        let exact = d.eval(&[x]).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn differentiation_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, x in -2.0..2.0f64) {
        let f = Expr::parse("sin(s)*exp(s/3)", &["s"]).unwrap();
        let g = Expr::parse("ln(2 + s^2)", &["s"]).unwrap();
        let sum = Expr::parse(&format!("({a})*sin(s)*exp(s/3) + ({b})*ln(2 + s^2)"), &["s"]).unwrap();
        let lhs = sum.differentiate("s").unwrap().eval(&[x]).unwrap();
        let rhs = a * f.differentiate("s").unwrap().eval(&[x]).unwrap() + b * g.differentiate("s").unwrap().eval(&[x]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn virtual_mass_is_a_cocycle(c0 in -0.5..0.5f64, c1 in -1.0..1.0f64, d1 in -1.0..1.0f64, x in -10.0..10.0f64) {
        let rd = circle("cos(s)", &format!("{c0} + {c1}*cos(s) + {d1}*sin(2*s)"));
        let vp = coarse(&rd);
        let lhs = vp.eval_m(x + TAU);
        let rhs = vp.mt() * vp.eval_m(x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn classification_is_invariant_under_diffeomorphism(a in -0.8..0.8f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
        // EL (odd Ψ₁ on a periodic mass) and SEL variants
        for (p1, p2) in [("sin(s)", &*format!("{b}*cos(s)")), (&*format!("{c}*cos(s) + 0.5"), "0")] {
            let rd = circle(p1, p2);
            let k1 = classify(&coarse(&rd), &ClassifyOptions::default()).kind;
            let d = CircleDiffeo::from_expr(&format!("s + {a}*sin(s)"), None, TAU, TAU).unwrap();
            let rd2 = transform(&rd, &d, &XformOptions { n: 512 }).unwrap();
            let k2 = classify(&coarse(&rd2), &ClassifyOptions::default()).kind;
            prop_assert_eq!(k1, k2);
        }
    }

    #[test]
    fn transform_respects_composition(a in -0.6..0.6f64, b in -0.6..0.6f64, y in 0.0..TAU) {
        let rd = circle("cos(s) + 0.5", "sin(s)");
        let opts = XformOptions { n: 1024 };
        let d1 = CircleDiffeo::from_expr(&format!("s + {a}*sin(s)"), None, TAU, TAU).unwrap();
        let d2 = CircleDiffeo::from_expr(&format!("s + {b}*sin(2*s)/2"), None, TAU, TAU).unwrap();
        let stepwise = transform(&transform(&rd, &d1, &opts).unwrap(), &d2, &opts).unwrap();
        let direct = transform(&rd, &d1.then(&d2, &opts).unwrap(), &opts).unwrap();
        prop_assert!((stepwise.psi1(y) - direct.psi1(y)).abs() <= 1e-6);
        prop_assert!((stepwise.psi2(y) - direct.psi2(y)).abs() <= 1e-6);
    }

    #[test]
    fn diffeomorphism_inverse_round_trips(a in -0.9..0.9f64, x in -20.0..20.0f64) {
        let d = CircleDiffeo::from_expr(&format!("s + {a}*sin(s)"), None, TAU, TAU).unwrap();
        prop_assert!((d.inverse(d.phi(x)) - x).abs() <= 1e-9 * x.abs().max(1.0));
    }

    #[test]
    fn lift_of_a_solution_is_a_solution(x0 in 0.0..TAU, v0 in -2.0..2.0f64) {
        // x(t) + T solves the same equation: shifting the start shifts the orbit
        let rd = fixtures::EXAMPLE_2.model().reduced().unwrap();
        let opts = IntegrateOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let a = integrate(&rd, x0, v0, 3.0, &opts);
        let b = integrate(&rd, x0 + TAU, v0, 3.0, &opts);
        let (pa, pb) = (a.last(), b.last());
        prop_assert!((pb.x - pa.x - TAU).abs() <= 1e-7);
        prop_assert!((pb.xdot - pa.xdot).abs() <= 1e-7);
    }

    #[test]
    fn lagrangians_are_periodic_and_vanish_on_solutions(x in -TAU..TAU, v in -2.0..2.0f64) {
        for fx in [&fixtures::EXAMPLE_1, &fixtures::EXAMPLE_2, &fixtures::EXAMPLE_3] {
            let rd = fx.model().reduced().unwrap();
            let vp = VirtualPair::with_defaults(&rd).unwrap();
            let h = synthesize(&classify(&vp, &ClassifyOptions::default()), &vp).unwrap();
            let (l0, l1) = (h.eval(x, v), h.eval(x + TAU, v));
            prop_assert!((l0 - l1).abs() <= 1e-8 * l0.abs().max(1.0), "{}: {} vs {}", fx.name, l0, l1);
            let r = h.el_residual(&rd, x, v, rd.accel(x, v));
            prop_assert!(r.abs() <= 1e-7, "{}: residual {}", fx.name, r);
        }
    }
}

#[test]
fn classification_survives_refinement() {
    for fx in fixtures::ALL {
        let rd = fx.model().reduced().unwrap();
        let base = VirtualPair::with_defaults(&rd).unwrap();
        let fine = VirtualPair::new(&rd, &PairOptions { n: 4096, quad_tol: 1e-11, ..Default::default() }).unwrap();
        let k = |vp: &VirtualPair| classify(vp, &ClassifyOptions::default()).kind;
        assert_eq!(k(&base), k(&fine), "{}", fx.name);
    }
}

#[test]
fn lagrangian_kinds_need_periodic_mass() {
    for fx in fixtures::ALL {
        let vp = VirtualPair::with_defaults(&fx.model().reduced().unwrap()).unwrap();
        let kind = classify(&vp, &ClassifyOptions::default()).kind;
        if matches!(kind, Kind::ElMechanical | Kind::Sel) {
            assert!((vp.mt() - 1.0).abs() <= 1e-6, "{}", fx.name);
        }
    }
}
