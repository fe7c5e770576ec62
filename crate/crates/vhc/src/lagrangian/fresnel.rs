//! Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt`, `S(x) = ∫₀ˣ sin(πt²/2) dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::quad::{adaptive_simpson, SimpsonOptions};

const SERIES_MAX: f64 = 3.0;
const ASYMPTOTIC_MIN: f64 = 40.0;

/// Power series, accurate to ~1e-12 for |x| ≤ 3.
pub(crate) fn series(x: f64) -> (f64, f64) {
    let z = FRAC_PI_2 * x * x;
    let z2 = z * z;
    // C = x Σ (−1)ⁿ z^{2n} / ((2n)! (4n+1)),  S = x Σ (−1)ⁿ z^{2n+1} / ((2n+1)! (4n+3))
    let mut c = 0.0;
    let mut s = 0.0;
    let mut tc = 1.0; // (−1)ⁿ z^{2n}/(2n)!
    let mut ts = z; // (−1)ⁿ z^{2n+1}/(2n+1)!
    for n in 0..200 {
        let nf = n as f64;
        let dc = tc / (4.0 * nf + 1.0);
        let ds = ts / (4.0 * nf + 3.0);
        c += dc;
        s += ds;
        if dc.abs() < 1e-18 * c.abs().max(1e-300) && ds.abs() < 1e-18 * s.abs().max(1e-300) {
            break;
        }
        tc *= -z2 / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
        ts *= -z2 / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0));
    }
    (x * c, x * s)
}

/// `(∫_a^b cos(πt²/2), ∫_a^b sin(πt²/2))` for `0 < a < b`, via `u = πt²/2`
/// on half-period segments of `u`.
pub(crate) fn quadrature(a: f64, b: f64) -> (f64, f64) {
    let ua = FRAC_PI_2 * a * a;
    let ub = FRAC_PI_2 * b * b;
    let opts = SimpsonOptions { tol: 1e-15, max_depth: 40, min_depth: 2, max_evals: 1_000_000 };
    let jac = |u: f64| 1.0 / (2.0 * PI * u).sqrt();
    let mut c = 0.0;
    let mut s = 0.0;
    let mut lo = ua;
    // segment boundaries at multiples of π/2 keep each integrand single-signed
    let mut next = ((ua / FRAC_PI_2).floor() + 1.0) * FRAC_PI_2;
    while lo < ub {
        let hi = next.min(ub);
        c += adaptive_simpson(&mut |u| u.cos() * jac(u), lo, hi, opts).unwrap_or(f64::NAN);
        s += adaptive_simpson(&mut |u| u.sin() * jac(u), lo, hi, opts).unwrap_or(f64::NAN);
        lo = hi;
        next += FRAC_PI_2;
    }
    (c, s)
}

/// Auxiliary functions `f, g` with `C = ½ + f sin(πx²/2) − g cos(πx²/2)`,
/// `S = ½ − f cos(πx²/2) − g sin(πx²/2)`, from their asymptotic series.
fn asymptotic(x: f64) -> (f64, f64) {
    let pz2 = PI * x * x;
    let r = 1.0 / (pz2 * pz2);
    // f ~ 1/(πx) Σ (−1)^m (4m−1)!! / (πx²)^{2m},  g ~ 1/(πx) Σ (−1)^m (4m+1)!! / (πx²)^{2m+1}
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf = 1.0;
    let mut tg = 1.0 / pz2;
    for m in 0..12 {
        f += tf;
        g += tg;
        let mf = m as f64;
        tf *= -(4.0 * mf + 1.0) * (4.0 * mf + 3.0) * r;
        tg *= -(4.0 * mf + 3.0) * (4.0 * mf + 5.0) * r;
        if tf.abs() < 1e-18 && tg.abs() < 1e-18 {
            break;
        }
    }
    let pre = 1.0 / (PI * x);
    (pre * f, pre * g)
}

fn positive(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX {
        series(x)
    } else if x <= ASYMPTOTIC_MIN {
        let (c0, s0) = series(SERIES_MAX);
        let (dc, ds) = quadrature(SERIES_MAX, x);
        (c0 + dc, s0 + ds)
    } else {
        let (f, g) = asymptotic(x);
        let arg = FRAC_PI_2 * x * x;
        let (sn, cs) = arg.sin_cos();
        (0.5 + f * sn - g * cs, 0.5 - f * cs - g * sn)
    }
}

/// Both Fresnel integrals at `x`.
pub fn fresnel(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x.is_infinite() {
        return (0.5f64.copysign(x), 0.5f64.copysign(x));
    }
    let (c, s) = positive(x.abs());
    if x < 0.0 { (-c, -s) } else { (c, s) }
}

pub fn fresnel_c(x: f64) -> f64 {
    fresnel(x).0
}

pub fn fresnel_s(x: f64) -> f64 {
    fresnel(x).1
}
