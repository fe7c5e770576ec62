//! Orbit types on the cylinder from Poincaré returns and speed diagnostics.

use serde::Serialize;

use super::{Sample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitTag {
    Rotation,
    Oscillation,
    Helix,
    Equilibrium,
    LimitCycleConvergent,
    Unclassified,
}

impl OrbitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitTag::Rotation => "rotation",
            OrbitTag::Oscillation => "oscillation",
            OrbitTag::Helix => "helix",
            OrbitTag::Equilibrium => "equilibrium",
            OrbitTag::LimitCycleConvergent => "limit_cycle_convergent",
            OrbitTag::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitThresholds {
    /// Closure tolerance for a return on the cylinder.
    pub eps_close: f64,
    /// `‖(ẋ, ẍ)‖` below this everywhere means equilibrium.
    pub eps_eq: f64,
    /// Escape when the tail speed exceeds `escape_factor · max(1, |ẋ₀|)`.
    pub escape_factor: f64,
}

impl Default for OrbitThresholds {
    fn default() -> Self {
        OrbitThresholds { eps_close: 1e-3, eps_eq: 1e-8, escape_factor: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitDiagnostics {
    /// `"position"` (section `s = s₀`) or `"velocity"` (section `ṡ = 0`).
    pub section: &'static str,
    pub returns: usize,
    /// Distance to the initial state at the first return.
    pub closure_error: Option<f64>,
    /// Winding number accumulated up to the first return.
    pub net_winding: Option<i64>,
    /// Sign changes of `ẋ` up to the first return.
    pub sign_changes_first_return: Option<usize>,
    pub sign_changes_total: usize,
    /// Differences between consecutive return states (at most the first 8).
    pub return_differences: Vec<f64>,
    pub terminal_speed: f64,
    /// Mean `|ẋ|` over the second half of the final quarter minus the mean
    /// over its first half.
    pub terminal_speed_trend: f64,
    pub tail_sign_changes: usize,
    pub escape_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitClass {
    pub tag: OrbitTag,
    pub diagnostics: OrbitDiagnostics,
}

#[derive(Debug, Clone, Copy)]
struct Return {
    /// winding relative to the start
    k: i64,
    /// state coordinate compared across returns (ṡ or s)
    value: f64,
    closure: f64,
    /// sign changes of ẋ up to and including the crossing segment
    sign_changes: usize,
}

pub(super) fn hermite(t: f64, a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    // a = (t, y, y'), b likewise
    let h = b.0 - a.0;
    let u = (t - a.0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * a.1 + (u3 - 2.0 * u2 + u) * h * a.2 + (-2.0 * u3 + 3.0 * u2) * b.1 + (u3 - u2) * h * b.2
}

/// Root of `g` on `[lo, hi]` with `g(lo)·g(hi) ≤ 0`.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if (gm <= 0.0) == (glo <= 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn x_at(t: f64, a: &Sample, b: &Sample) -> f64 {
    hermite(t, (a.t, a.x, a.xdot), (b.t, b.x, b.xdot))
}

fn v_at(t: f64, a: &Sample, b: &Sample) -> f64 {
    hermite(t, (a.t, a.xdot, a.xddot), (b.t, b.xdot, b.xddot))
}

/// Cumulative sign changes of ẋ, ignoring exact zeros.
fn sign_change_counts(samples: &[Sample]) -> Vec<usize> {
    let mut out = Vec::with_capacity(samples.len());
    let mut last = 0.0f64;
    let mut count = 0;
    for s in samples {
        if s.xdot != 0.0 {
            let sg = s.xdot.signum();
            if last != 0.0 && sg != last {
                count += 1;
            }
            last = sg;
        }
        out.push(count);
    }
    out
}

fn returns(tr: &Trajectory, eps_eq: f64, counts: &[usize]) -> (&'static str, Vec<Return>) {
    let s = &tr.samples;
    let x0 = s[0].x;
    let v0 = s[0].xdot;
    let mut out = Vec::new();
    if v0.abs() > eps_eq {
        let dir = v0.signum();
        let t_per = tr.period;
        let level = |x: f64| match t_per {
            Some(t) => (x - x0) / t,
            None => x - x0,
        };
        for i in 0..s.len() - 1 {
            let (a, b) = (&s[i], &s[i + 1]);
            let (fa, fb) = (level(a.x), level(b.x));
            let k = if dir > 0.0 {
                let k = fb.floor();
                if fa < k && k <= fb { Some(k) } else { None }
            } else {
                let k = fb.ceil();
                if fb <= k && k < fa { Some(k) } else { None }
            };
            let Some(k) = k else { continue };
            if t_per.is_none() && k != 0.0 {
                continue;
            }
            let target = x0 + k * t_per.unwrap_or(0.0);
            let tc = bisect(a.t, b.t, |t| x_at(t, a, b) - target);
            let vc = v_at(tc, a, b);
            if vc * dir <= 0.0 {
                continue;
            }
            out.push(Return { k: k as i64, value: vc, closure: (vc - v0).abs(), sign_changes: counts[i + 1] });
        }
        ("position", out)
    } else {
        let a0 = s[0].xddot;
        let dir = if a0 < 0.0 { -1.0 } else { 1.0 };
        for i in 0..s.len() - 1 {
            let (a, b) = (&s[i], &s[i + 1]);
            if !(a.xdot * dir < 0.0 && b.xdot * dir >= 0.0) {
                continue;
            }
            let tc = bisect(a.t, b.t, |t| v_at(t, a, b));
            let xc = x_at(tc, a, b);
            let (k, closure) = match tr.period {
                Some(t) => {
                    let k = ((xc - x0) / t).round();
                    (k as i64, (xc - x0 - k * t).abs())
                }
                None => (0, (xc - x0).abs()),
            };
            out.push(Return { k, value: xc - k as f64 * tr.period.unwrap_or(0.0), closure, sign_changes: counts[i + 1] });
        }
        ("velocity", out)
    }
}

/// Classifies a trajectory. Rules, in order:
/// equilibrium (`‖(ẋ, ẍ)‖ < ε_eq` throughout); a first return within
/// `ε_close` with winding 0 and at least two sign changes of `ẋ`
/// (oscillation) or winding ±1 and none (rotation); no closed return and an
/// escaping, monotone, sign-definite tail speed (helix); at least three
/// returns whose successive differences contract geometrically below
/// `ε_close` after a first return that does not close (limit-cycle
/// convergence); otherwise unclassified.
pub fn classify_orbit(tr: &Trajectory, th: &OrbitThresholds) -> OrbitClass {
    let s = &tr.samples;
    let counts = sign_change_counts(s);
    let v0 = s[0].xdot;
    let escape = th.escape_factor * v0.abs().max(1.0);
    let tail_start = s.len() - s.len() / 4 - 1;
    let tail = &s[tail_start.min(s.len() - 1)..];
    let tail_sign_changes = counts[s.len() - 1] - counts[tail_start.min(s.len() - 1)];
    let terminal_speed = s[s.len() - 1].xdot.abs();
    // speed oscillates within a revolution, so compare the halves of the tail
    let half = tail.len() / 2;
    let mean = |v: &[Sample]| v.iter().map(|p| p.xdot.abs()).sum::<f64>() / v.len().max(1) as f64;
    let trend = if half > 0 { mean(&tail[half..]) - mean(&tail[..half]) } else { 0.0 };

    let (section, rets) = if s.len() >= 2 { returns(tr, th.eps_eq, &counts) } else { ("position", Vec::new()) };
    let diffs: Vec<f64> = rets.windows(2).map(|w| (w[1].value - w[0].value).abs()).collect();
    let diag = OrbitDiagnostics {
        section,
        returns: rets.len(),
        closure_error: rets.first().map(|r| r.closure),
        net_winding: rets.first().map(|r| r.k),
        sign_changes_first_return: rets.first().map(|r| r.sign_changes),
        sign_changes_total: counts[s.len() - 1],
        return_differences: diffs.iter().take(8).copied().collect(),
        terminal_speed,
        terminal_speed_trend: trend,
        tail_sign_changes,
        escape_threshold: escape,
    };

    // returns agree with each other only up to integration error
    let scale = rets.iter().map(|r| r.value.abs()).fold(1.0, f64::max);
    let noise = 1e3 * (tr.meta.rtol * scale + tr.meta.atol);
    let tag = decide(s, &rets, &diffs, th, escape, trend, tail_sign_changes, terminal_speed, noise);
    OrbitClass { tag, diagnostics: diag }
}

#[allow(clippy::too_many_arguments)]
fn decide(
    s: &[Sample],
    rets: &[Return],
    diffs: &[f64],
    th: &OrbitThresholds,
    escape: f64,
    trend: f64,
    tail_sign_changes: usize,
    terminal_speed: f64,
    noise: f64,
) -> OrbitTag {
    if s.iter().all(|p| p.xdot.hypot(p.xddot) < th.eps_eq) {
        return OrbitTag::Equilibrium;
    }
    if let Some(r) = rets.first() {
        if r.closure <= th.eps_close {
            if r.k == 0 && r.sign_changes >= 2 {
                return OrbitTag::Oscillation;
            }
            if r.k.abs() == 1 && r.sign_changes == 0 {
                return OrbitTag::Rotation;
            }
        }
    }
    let closed = rets.iter().any(|r| r.closure <= th.eps_close);
    if !closed && terminal_speed > escape && trend > 0.0 && tail_sign_changes == 0 {
        return OrbitTag::Helix;
    }
    if rets.len() >= 3 && rets[0].closure > th.eps_close {
        let last = *diffs.last().unwrap();
        // contraction must be geometric down to the noise floor
        let geometric = diffs.windows(2).all(|w| w[0] <= noise || w[1] <= 0.9 * w[0]);
        let same_winding = rets.windows(2).all(|w| w[1].k - w[0].k == rets[1].k - rets[0].k);
        if last < th.eps_close && geometric && same_winding {
            return OrbitTag::LimitCycleConvergent;
        }
    }
    OrbitTag::Unclassified
}
