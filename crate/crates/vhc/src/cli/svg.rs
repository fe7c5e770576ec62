//! Phase portraits on the cylinder chart as standalone SVG.

use std::fmt::Write;

use crate::dynamics::{OrbitTag, PortraitEntry};

const W: f64 = 800.0;
const H: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn color(tag: OrbitTag) -> &'static str {
    match tag {
        OrbitTag::Rotation => "#1f77b4",
        OrbitTag::Oscillation => "#2ca02c",
        OrbitTag::Helix => "#d62728",
        OrbitTag::Equilibrium => "#000000",
        OrbitTag::LimitCycleConvergent => "#9467bd",
        OrbitTag::Unclassified => "#7f7f7f",
    }
}

const TAGS: [OrbitTag; 6] = [
    OrbitTag::Rotation,
    OrbitTag::Oscillation,
    OrbitTag::Helix,
    OrbitTag::Equilibrium,
    OrbitTag::LimitCycleConvergent,
    OrbitTag::Unclassified,
];

struct Frame {
    s: (f64, f64),
    v: (f64, f64),
}

impl Frame {
    fn px(&self, s: f64, v: f64) -> (f64, f64) {
        let x = LEFT + (s - self.s.0) / (self.s.1 - self.s.0) * (W - LEFT - RIGHT);
        let y = TOP + (self.v.1 - v) / (self.v.1 - self.v.0) * (H - TOP - BOTTOM);
        (x, y)
    }
}

// pixel spacing and per-curve budget keep files small for long orbits
const MIN_SPACING: f64 = 1.5;
const MAX_POINTS: usize = 600;

/// Splits `(s, ṡ)` points into pixel polylines, breaking at seam wraps and
/// where the curve leaves the velocity window, and thinning points closer
/// than [`MIN_SPACING`] pixels.
fn polylines(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, period: Option<f64>) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut cur: Vec<(f64, f64)> = Vec::new();
    let mut prev_s: Option<f64> = None;
    let mut kept = 0;
    for (x, v) in pts {
        if kept >= MAX_POINTS {
            break;
        }
        let margin = 0.02 * (frame.v.1 - frame.v.0);
        if !(v >= frame.v.0 - margin && v <= frame.v.1 + margin) {
            if cur.len() > 1 {
                out.push(std::mem::take(&mut cur));
            }
            cur.clear();
            prev_s = None;
            continue;
        }
        let s = match period {
            Some(t) => x.rem_euclid(t),
            None => x,
        };
        let wrapped = match (prev_s, period) {
            (Some(p), Some(t)) => (s - p).abs() > 0.5 * t,
            _ => false,
        };
        prev_s = Some(s);
        if wrapped && cur.len() > 1 {
            out.push(std::mem::take(&mut cur));
        } else if wrapped {
            cur.clear();
        }
        let p = frame.px(s, v);
        match cur.last() {
            Some(&(lx, ly)) if (p.0 - lx).hypot(p.1 - ly) < MIN_SPACING => {}
            _ => {
                cur.push(p);
                kept += 1;
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn write_polyline(out: &mut String, line: &[(f64, f64)], stroke: &str, extra: &str) {
    if line.len() == 1 {
        let (x, y) = line[0];
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{stroke}"/>"#);
        return;
    }
    let _ = write!(out, r#"<polyline fill="none" stroke="{stroke}" {extra} points=""#);
    for (i, (x, y)) in line.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out.push_str("\"/>\n");
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Portrait of `entries` on `[s_range] × [sdot_range]` with an optional
/// overlay curve `ṡ = ν(s)` given as `(s, ν)` pairs.
pub fn portrait(
    entries: &[PortraitEntry],
    period: Option<f64>,
    s_range: (f64, f64),
    sdot_range: (f64, f64),
    overlay: Option<&[(f64, f64)]>,
) -> String {
    let frame = Frame { s: s_range, v: sdot_range };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let (x0, y0) = frame.px(s_range.0, sdot_range.0);
    let (x1, y1) = frame.px(s_range.1, sdot_range.1);
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot"><rect x="{x0}" y="{y1}" width="{}" height="{}"/></clipPath></defs>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(out, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#444444"/>"##, x1 - x0, y0 - y1);
    for s in ticks(s_range.0, s_range.1, 4) {
        let (x, _) = frame.px(s, sdot_range.0);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="#444444"/>"##, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{s:.3}</text>"#, y0 + 20.0);
    }
    for v in ticks(sdot_range.0, sdot_range.1, 4) {
        let (_, y) = frame.px(s_range.0, v);
        let _ = writeln!(out, r##"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="#444444"/>"##, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">s</text>"#, 0.5 * (x0 + x1), H - 15.0);
    let _ = writeln!(out, r#"<text x="15" y="{:.2}" text-anchor="middle">ṡ</text>"#, 0.5 * (y0 + y1));

    let _ = writeln!(out, r#"<g clip-path="url(#plot)" stroke-width="1">"#);
    for e in entries {
        let c = color(e.class.tag);
        let _ = writeln!(out, r#"<g class="{}" data-i="{}" data-j="{}">"#, e.class.tag.as_str(), e.i, e.j);
        let pts = e.trajectory.samples.iter().map(|p| (p.x, p.xdot));
        for line in polylines(&frame, pts, period) {
            write_polyline(&mut out, &line, c, "");
        }
        out.push_str("</g>\n");
    }
    if let Some(nu) = overlay {
        out.push_str("<g class=\"limit-cycle\">\n");
        for line in polylines(&frame, nu.iter().copied(), None) {
            write_polyline(&mut out, &line, "#000000", r#"stroke-width="2.5" stroke-dasharray="6,3""#);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");

    let lx = W - RIGHT + 20.0;
    let mut ly = TOP + 10.0;
    for tag in TAGS {
        let n = entries.iter().filter(|e| e.class.tag == tag).count();
        if n == 0 {
            continue;
        }
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="3"/>"#, lx + 20.0, color(tag));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{} ({n})</text>"#, lx + 26.0, ly + 4.0, tag.as_str());
        ly += 20.0;
    }
    if overlay.is_some() {
        let _ = writeln!(
            out,
            r##"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="#000000" stroke-width="2.5" stroke-dasharray="6,3"/>"##,
            lx + 20.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">limit cycle</text>"#, lx + 26.0, ly + 4.0);
    }
    out.push_str("</svg>\n");
    out
}
