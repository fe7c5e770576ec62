//! Acceptance suite: one line per criterion, `PASS`/`FAIL`, with runtime.
//!
//! Every reference value is computed here from closed forms or from an
//! independent quadrature/integrator, never from the library under test.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vhc::analysis::{classify, ClassifyOptions, Kind, PairOptions, VirtualPair};
use vhc::dynamics::{
    integrate, limit_cycle, portrait, IntegrateOptions, LimitCycleOptions, OrbitTag, OrbitThresholds, PortraitOptions,
};
use vhc::fixtures;
use vhc::lagrangian::{synthesize, LagrangianHandle};
use vhc::reduction::particle::{particle, ParticleParams};
use vhc::reduction::{ReducedDynamics, SimulateOptions};
use vhc::xform::{conservative_form, XformOptions};

// ---- oracles -------------------------------------------------------------

/// Composite 5-point Gauss–Legendre with `cells` equal cells on `[a, b]`.
fn gl5(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891, 0.2369268850561891];
    let h = (b - a) / cells as f64;
    let mut s = 0.0;
    for k in 0..cells {
        let c = a + h * (k as f64 + 0.5);
        for i in 0..5 {
            s += W[i] * f(c + 0.5 * h * X[i]);
        }
    }
    0.5 * h * s
}

/// `Ṽ(x) = −∫₀ˣ Ψ₁ M̃` for a known closed-form mass.
fn potential_oracle(psi1: impl Fn(f64) -> f64, mass: impl Fn(f64) -> f64, x: f64) -> f64 {
    let cells = ((x.abs() / TAU * 400.0).ceil() as usize).max(1);
    -gl5(|t| psi1(t) * mass(t), 0.0, x, cells)
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

// ---- harness -------------------------------------------------------------

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn run(n: u8, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = f();
    let dt = t0.elapsed();
    let ok = out.ok && dt < budget;
    println!(
        "{} criterion {n}: {title} — {} [{:.2} s of {:.0} s]",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        dt.as_secs_f64(),
        budget.as_secs_f64()
    );
    ok
}

// ---- criteria ------------------------------------------------------------

fn c1() -> Outcome {
    let model = fixtures::EXAMPLE_1.model();
    let vp = VirtualPair::with_defaults(&model.reduced().unwrap()).unwrap();
    let kind = classify(&vp, &ClassifyOptions::default()).kind;
    let mut rng = StdRng::seed_from_u64(1);
    let (mut em, mut ev): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let x = rng.random_range(0.0..TAU);
        let c = x.cos();
        em = em.max((vp.eval_m(x) - 9.0 / (c + 2.0).powi(2)).abs());
        ev = ev.max((vp.eval_v(x) - (4.0 - 18.0 * (c + 1.0) / (c + 2.0).powi(2))).abs());
    }
    check(
        em <= 1e-8 && ev <= 1e-8 && kind == Kind::ElMechanical,
        format!("max|ΔM| {em:.1e}, max|ΔV| {ev:.1e}, kind {}", kind.as_str()),
    )
}

fn c2() -> Outcome {
    let model = fixtures::EXAMPLE_2.model();
    let vp = VirtualPair::with_defaults(&model.reduced().unwrap()).unwrap();
    let kind = classify(&vp, &ClassifyOptions::default()).kind;
    let mut rng = StdRng::seed_from_u64(2);
    let mut em: f64 = 0.0;
    for _ in 0..100 {
        let x = rng.random_range(0.0..TAU);
        em = em.max((vp.eval_m(x) - (-2.0 * x.sin()).exp()).abs());
    }
    let vt = vp.vt();
    let oracle = potential_oracle(|t| t.cos() + 0.5, |t| (-2.0 * t.sin()).exp(), TAU);
    let ok = em <= 1e-8 && (vt.abs() - 7.1615).abs() <= 1e-3 && (vt - oracle).abs() <= 1e-8 && kind == Kind::Sel;
    check(ok, format!("max|ΔM| {em:.1e}, V(2π) = {vt:.6} (quadrature {oracle:.6}), kind {}", kind.as_str()))
}

fn c3() -> Outcome {
    let cases: [(&str, ReducedDynamics); 5] = [
        ("example1", fixtures::EXAMPLE_1.model().reduced().unwrap()),
        ("example2", fixtures::EXAMPLE_2.model().reduced().unwrap()),
        ("example3", fixtures::EXAMPLE_3.model().reduced().unwrap()),
        ("example4", fixtures::EXAMPLE_4.model().reduced().unwrap()),
        ("particle3", fixtures::PARTICLE_3.model().reduced().unwrap()),
    ];
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: (f64, &str) = (0.0, "");
    for (name, rd) in &cases {
        let vp = VirtualPair::with_defaults(rd).unwrap();
        let (mt, vt) = (vp.mt(), vp.vt());
        let eps_m = vp.options().eps_m;
        for _ in 0..100 {
            let x = rng.random_range(0.0..TAU);
            let (m0, v0) = (vp.eval_m(x), vp.eval_v(x));
            for n in -3i32..=3 {
                let y = x + n as f64 * TAU;
                let mn = mt.powi(n);
                let m_expect = mn * m0;
                let v_expect = if (mt - 1.0).abs() > eps_m {
                    mn * v0 + vt * (mn - 1.0) / (mt - 1.0)
                } else {
                    v0 + n as f64 * vt
                };
                // the V identity subtracts terms of size |M̃(T)ⁿ Ṽ(x)|; errors are
                // measured relative to that size when it exceeds the result
                let v_scale = (mn * v0).abs().max(1.0);
                let e = rel(vp.eval_m(y), m_expect, 1e-300).max(rel(vp.eval_v(y), v_expect, v_scale));
                if e > worst.0 {
                    worst = (e, name);
                }
            }
        }
    }
    // lifted values against quadrature from 0 on [−3T, 3T]
    let vp = VirtualPair::with_defaults(&cases[1].1).unwrap();
    let psi1 = |t: f64| t.cos() + 0.5;
    let mass = |t: f64| (-2.0 * t.sin()).exp();
    let mut direct: f64 = 0.0;
    for _ in 0..20 {
        let x = rng.random_range(-3.0 * TAU..3.0 * TAU);
        direct = direct.max((vp.eval_v(x) - potential_oracle(psi1, mass, x)).abs()).max((vp.eval_m(x) - mass(x)).abs());
    }
    check(
        worst.0 <= 1e-7 && direct <= 1e-7,
        format!("worst relative deviation {:.1e} ({}); example2 vs quadrature on [−3T, 3T] {direct:.1e}", worst.0, worst.1),
    )
}

fn c4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    // Example 2: oracle mass is closed form, potential from quadrature
    let rd2 = fixtures::EXAMPLE_2.model().reduced().unwrap();
    let vp2 = VirtualPair::with_defaults(&rd2).unwrap();
    let h2 = synthesize(&classify(&vp2, &ClassifyOptions::default()), &vp2).unwrap();
    let psi1 = |t: f64| t.cos() + 0.5;
    let mass = |t: f64| (-2.0 * t.sin()).exp();
    let f0 = 1.0 / potential_oracle(psi1, mass, TAU);
    let mut worst2: f64 = 0.0;
    for _ in 0..200 {
        let x = rng.random_range(-TAU..2.0 * TAU);
        let v = rng.random_range(-2.0..2.0);
        let a = rng.random_range(-3.0..3.0);
        let m = mass(x);
        let e0 = 0.5 * m * v * v + potential_oracle(psi1, mass, x);
        let alpha = TAU * f0 * m * (TAU * f0 * e0).cos();
        let defect = a - psi1(x) - x.cos() * v * v;
        let expect = alpha * defect;
        // scale of the product with |cos| ≤ 1, so relative error is defined at its zeros
        let scale = (TAU * f0 * m).abs() * (a.abs() + psi1(x).abs() + x.cos().abs() * v * v);
        worst2 = worst2.max((h2.el_residual(&rd2, x, v, a) - expect).abs() / scale);
    }
    // Example 3, s̈ = λ: printed factorization (2π/λT)cos((2π/λT)(ẋ²/2 − λx))(ẍ − λ)
    let model3 = fixtures::EXAMPLE_3.model();
    let lambda = model3.constants["lambda"];
    let rd3 = model3.reduced().unwrap();
    let vp3 = VirtualPair::with_defaults(&rd3).unwrap();
    let h3 = synthesize(&classify(&vp3, &ClassifyOptions::default()), &vp3).unwrap();
    let is_fresnel = matches!(h3, LagrangianHandle::SingularFresnel { .. });
    let w = TAU / (lambda * TAU);
    let mut worst3: f64 = 0.0;
    let mut sign = 0.0;
    for _ in 0..200 {
        let x = rng.random_range(-TAU..2.0 * TAU);
        let v = rng.random_range(-2.0..2.0);
        let a = rng.random_range(-3.0..3.0);
        let printed = w * (w * (0.5 * v * v - lambda * x)).cos() * (a - lambda);
        let r = h3.el_residual(&rd3, x, v, a);
        if sign == 0.0 && printed.abs() > 1e-3 {
            sign = (r / printed).signum();
        }
        let scale = w * (a.abs() + lambda.abs());
        worst3 = worst3.max((r - sign * printed).abs() / scale);
    }
    check(
        worst2 <= 1e-6 && worst3 <= 1e-6 && is_fresnel && sign != 0.0,
        format!(
            "example2 worst {worst2:.1e}; example3 worst {worst3:.1e} vs printed form with overall factor {sign:+}"
        ),
    )
}

fn c5() -> Outcome {
    let rd = fixtures::EXAMPLE_4.model().reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    let lc = match limit_cycle(&rd, &vp, &LimitCycleOptions::default()) {
        Ok(lc) => lc,
        Err(e) => return check(false, format!("limit cycle failed: {e}")),
    };
    let n = lc.xs.len() - 1;
    let seam = (lc.nu[n] - lc.nu[0]).abs().max((lc.eval(1.234 + TAU) - lc.eval(1.234)).abs());
    // w = ν² satisfies w′ = 2Ψ₁ + 2Ψ₂w; integrated backward the periodic
    // solution attracts, so RK4 from an arbitrary value two periods ahead
    // lands on it
    let psi1 = |s: f64| -s.cos() - 2.0;
    let psi2 = |s: f64| s.sin() + 2.0;
    let f = |s: f64, w: f64| 2.0 * psi1(s) + 2.0 * psi2(s) * w;
    let steps_per_cell = 4;
    let h = -TAU / (n * steps_per_cell) as f64;
    let mut w = 1.0;
    let mut s = 2.0 * TAU;
    let mut oracle = vec![0.0; n + 1];
    for k in (0..2 * n).rev() {
        for _ in 0..steps_per_cell {
            let k1 = f(s, w);
            let k2 = f(s + 0.5 * h, w + 0.5 * h * k1);
            let k3 = f(s + 0.5 * h, w + 0.5 * h * k2);
            let k4 = f(s + h, w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
        }
        if k <= n {
            oracle[k] = -w.sqrt();
        }
    }
    let nu_err = lc.nu.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // invariance residual with a periodic 4th-order difference of the samples
    let dx = TAU / n as f64;
    let mut resid: f64 = 0.0;
    for k in 0..n {
        let at = |j: isize| lc.nu[(k as isize + j).rem_euclid(n as isize) as usize];
        let d = (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * dx);
        let x = lc.xs[k];
        resid = resid.max((d * at(0) - psi1(x) - psi2(x) * at(0) * at(0)).abs());
    }
    let opts = IntegrateOptions::default();
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst_dist: f64 = 0.0;
    for _ in 0..20 {
        let s0 = rng.random_range(0.0..TAU);
        let v0 = rng.random_range(-3.0..=0.0);
        let tr = integrate(&rd, s0, v0, 200.0, &opts);
        let d = if tr.completed() {
            let p = tr.last();
            lc.distance(p.x, p.xdot)
        } else {
            f64::INFINITY
        };
        worst_dist = worst_dist.max(d);
    }
    let r2 = lc.rate.map(|r| r.r2).unwrap_or(f64::NAN);
    check(
        seam <= 1e-9 && resid <= 1e-6 && lc.residual_sup <= 1e-6 && nu_err <= 1e-6 && worst_dist <= 1e-4 && r2 >= 0.99,
        format!(
            "seam {seam:.1e}, residual {resid:.1e} (library {:.1e}), |ν − RK4| {nu_err:.1e}, worst final distance {worst_dist:.1e}, R² {r2:.4}",
            lc.residual_sup
        ),
    )
}

fn c6() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for fx in [&fixtures::EXAMPLE_1, &fixtures::EXAMPLE_2] {
        let rd1 = fx.model().reduced().unwrap();
        let vp1 = VirtualPair::with_defaults(&rd1).unwrap();
        let kind1 = classify(&vp1, &ClassifyOptions::default()).kind;
        let (rd2, _) = match conservative_form(&rd1, &vp1, TAU, &XformOptions::default()) {
            Ok(r) => r,
            Err(e) => return check(false, format!("{}: {e}", fx.name)),
        };
        let vp2 = VirtualPair::new(&rd2, &PairOptions { n: 1024, ..Default::default() }).unwrap();
        let kind2 = classify(&vp2, &ClassifyOptions::default()).kind;
        let mut rng = StdRng::seed_from_u64(6);
        let (mut p2, mut dm): (f64, f64) = (0.0, 0.0);
        for _ in 0..500 {
            let y = rng.random_range(0.0..TAU);
            p2 = p2.max(rd2.psi2(y).abs());
            // M̃₂ = exp(−2∫₀ʸΨ₂²) by independent quadrature
            let m = (-2.0 * gl5(|u| rd2.psi2(u), 0.0, y, 64)).exp();
            dm = dm.max((m - 1.0).abs()).max((vp2.eval_m(y) - 1.0).abs());
        }
        ok &= p2 <= 1e-6 && dm <= 1e-6 && kind1 == kind2;
        lines.push(format!("{}: sup|Ψ₂| {p2:.1e}, sup|M−1| {dm:.1e}, {} → {}", fx.name, kind1.as_str(), kind2.as_str()));
    }
    check(ok, lines.join("; "))
}

fn tally(entries: &[vhc::dynamics::PortraitEntry]) -> Vec<(OrbitTag, usize)> {
    let mut t: Vec<(OrbitTag, usize)> = Vec::new();
    for e in entries {
        match t.iter_mut().find(|(k, _)| *k == e.class.tag) {
            Some(slot) => slot.1 += 1,
            None => t.push((e.class.tag, 1)),
        }
    }
    t
}

fn show(t: &[(OrbitTag, usize)]) -> String {
    t.iter().map(|(k, n)| format!("{} {n}", k.as_str())).collect::<Vec<_>>().join(", ")
}

fn grid_opts(rd: &ReducedDynamics, horizon: f64) -> PortraitOptions {
    PortraitOptions {
        s_range: (0.0, rd.period().unwrap()),
        sdot_range: (-3.0, 3.0),
        grid: (20, 20),
        horizon,
        integrate: IntegrateOptions::default(),
        thresholds: OrbitThresholds::default(),
    }
}

fn c7() -> Outcome {
    let budget = Duration::from_secs(30);
    let mut ok = true;
    let mut lines = Vec::new();
    let mut slowest = Duration::ZERO;
    let el_sel = [
        (&fixtures::EXAMPLE_1, 60.0),
        (&fixtures::EXAMPLE_2, 100.0),
        (&fixtures::EXAMPLE_3, 60.0),
        (&fixtures::PARTICLE_1, 60.0),
        (&fixtures::PARTICLE_2, 60.0),
        (&fixtures::PARTICLE_3, 60.0),
    ];
    for (fx, horizon) in el_sel {
        let rd = fx.model().reduced().unwrap();
        let t0 = Instant::now();
        let entries = portrait(&rd, &grid_opts(&rd, horizon));
        slowest = slowest.max(t0.elapsed());
        let t = tally(&entries);
        let has = |tag| t.iter().any(|(k, _)| *k == tag);
        ok &= !has(OrbitTag::LimitCycleConvergent);
        match fx.name {
            "example1" => {
                ok &= has(OrbitTag::Rotation) && has(OrbitTag::Oscillation) && !has(OrbitTag::Helix);
            }
            "example2" => ok &= has(OrbitTag::Oscillation) && has(OrbitTag::Helix),
            _ => {}
        }
        lines.push(format!("{}: {}", fx.name, show(&t)));
    }
    ok &= slowest < budget;
    check(ok, format!("{} (slowest grid {:.1} s)", lines.join("; "), slowest.as_secs_f64()))
}

/// Hand-derived reduced dynamics of the particle on the circle `b + (cos s, sin s)`
/// with force direction `R_θ q` and potential `−k/‖q − a‖`.
fn particle_oracle(p: &ParticleParams, s: f64) -> (f64, f64) {
    let (c, sn) = (s.cos(), s.sin());
    let q = [p.b[0] + c, p.b[1] + sn];
    let (ct, st) = (p.theta.cos(), p.theta.sin());
    // annihilator: R_θ applied to q rotated by +90°
    let jq = [-q[1], q[0]];
    let perp = [ct * jq[0] - st * jq[1], st * jq[0] + ct * jq[1]];
    let d1 = [-sn, c];
    let d2 = [-c, -sn];
    let r = [q[0] - p.a[0], q[1] - p.a[1]];
    let dist3 = (r[0] * r[0] + r[1] * r[1]).powf(1.5);
    let grad = [p.k * r[0] / dist3, p.k * r[1] / dist3];
    let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
    let den = dot(perp, d1);
    (-dot(perp, grad) / den, -dot(perp, d2) / den)
}

fn c8() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for case in 1..=4u8 {
        let p = ParticleParams::case(case).unwrap();
        let full = particle(&p).unwrap();
        let rd = full.reduce().unwrap();
        let mut err: f64 = 0.0;
        for i in 0..200 {
            let s = TAU * i as f64 / 200.0;
            let (p1, p2) = particle_oracle(&p, s);
            err = err.max((rd.psi1(s) - p1).abs()).max((rd.psi2(s) - p2).abs());
        }
        // closed forms quoted for the individual cases
        let vp = VirtualPair::with_defaults(&rd).unwrap();
        let mut extra: f64 = 0.0;
        let mut closed = String::new();
        match case {
            1 => {
                for i in 0..200 {
                    let s = TAU * i as f64 / 200.0;
                    extra = extra.max(rd.psi1(s).abs()).max(rd.psi2(s).abs());
                }
                closed.push_str("Ψ = 0");
                ok &= extra <= 1e-9;
            }
            2 => {
                for i in 0..200 {
                    let s = TAU * i as f64 / 200.0;
                    extra = extra.max(rd.psi1(s).abs()).max((vp.eval_m(s) - (4.0 + s.cos()).powi(2) / 25.0).abs());
                }
                closed.push_str("Ψ₁ = 0, M = (4 + cos)²/25");
                ok &= extra <= 1e-9;
            }
            3 => {
                let mass = |t: f64| ((1.0 + 0.75 * t.cos()) / 1.75).powi(2);
                let oracle = potential_oracle(|t| particle_oracle(&p, t).0, mass, TAU);
                extra = (vp.vt() - oracle).abs();
                closed = format!("V(2π) = {:.4} (quadrature {oracle:.6}, printed 0.2762)", vp.vt());
                ok &= extra <= 1e-9 && (vp.vt() - 0.2762).abs() <= 5e-5;
            }
            _ => {
                let tt = p.theta.tan();
                for i in 0..200 {
                    let s = TAU * i as f64 / 200.0;
                    extra = extra.max((rd.psi1(s) - tt / 5.0).abs()).max((rd.psi2(s) + tt).abs());
                }
                let m_err = rel(vp.eval_m(1.0), (2.0 * tt).exp(), 1.0);
                extra = extra.max(m_err);
                closed.push_str("Ψ₁ = tanθ/5, Ψ₂ = −tanθ, M = exp(2x tanθ)");
                ok &= extra <= 1e-9;
            }
        }
        ok &= err <= 1e-9;
        // closed loop from a point on the constraint manifold
        let (s0, v0, horizon) = (0.3, 0.8, 20.0);
        let q0 = full.sigma(s0).unwrap();
        let dq0 = full.sigma_prime(s0).unwrap() * v0;
        let sim = SimulateOptions { horizon, ..Default::default() };
        let tracking = full.simulate_full(q0.as_slice(), dq0.as_slice(), &sim).and_then(|tr| {
            let s = tr.projected_s(&full)?;
            Ok((tr, s))
        });
        let red = integrate(&rd, s0, v0, horizon, &IntegrateOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() });
        let sup = match tracking {
            Ok((tr, s)) if red.completed() => tr
                .samples
                .iter()
                .zip(&s)
                .filter_map(|(smp, s)| red.state_at(smp.t).map(|(x, _)| (s - x).abs()))
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        };
        ok &= sup <= 1e-3;
        lines.push(format!("case {case}: |ΔΨ| {err:.1e}, {closed} [{extra:.1e}], tracking {sup:.1e}"));
    }
    check(ok, lines.join("; "))
}

#[test]
fn acceptance() {
    println!();
    let s = Duration::from_secs;
    let results = [
        run(1, "example 1 closed-form mass and potential", s(1), c1),
        run(2, "example 2 mass, V(T) magnitude, SEL", s(1), c2),
        run(3, "lift identities for M and V", s(1), c3),
        run(4, "SEL residual factorization", s(2), c4),
        run(5, "limit cycle of example 4", s(10), c5),
        run(6, "conservative normal form", s(2), c6),
        run(7, "orbit trichotomy on 20×20 portraits", s(60 * 6), c7),
        run(8, "particle cases and closed-loop tracking", s(10), c8),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
