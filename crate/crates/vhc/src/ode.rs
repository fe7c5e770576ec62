//! Dormand–Prince 5(4) with step-size control and continuous output.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options { rtol: 1e-9, atol: 1e-11, h_init: None, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

/// Why the integration loop stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    StepUnderflow { t: f64 },
    NonFinite { t: f64 },
    MaxSteps { t: f64 },
    /// The step observer asked to stop.
    Stopped { t: f64 },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::StepUnderflow { .. } => "step_underflow",
            Termination::NonFinite { .. } => "non_finite",
            Termination::MaxSteps { .. } => "max_steps",
            Termination::Stopped { .. } => "stopped",
        }
    }
}

/// Interpolant over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    r: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.r;
        for i in 0..out.len() {
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.r[0].len()];
        self.eval_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`.
///
/// `admissible(y_old, y_new)` may veto a step (it is then retried with half
/// the size).  `on_step(step, y_new, f_new)` is called after every accepted
/// step; returning `false` stops the integration.
pub fn integrate<F, A, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Dopri5Options,
    mut admissible: A,
    mut on_step: O,
) -> (Termination, Stats)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    A: FnMut(&[f64], &[f64]) -> bool,
    O: FnMut(&DenseStep, &[f64], &[f64]) -> bool,
{
    let n = y0.len();
    let mut st = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    f(t, &y, &mut k1);
    st.evals += 1;
    if !all_finite(&k1) || !all_finite(&y) {
        return (Termination::NonFinite { t }, st);
    }
    let span = t_end - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut f, t, &y, &k1, opts, &mut st),
    }
    .min(opts.h_max)
    .min(span);
    let mut last_fail_nonfinite = false;

    while t < t_end {
        if st.accepted + st.rejected >= opts.max_steps {
            return (Termination::MaxSteps { t }, st);
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            let term =
                if last_fail_nonfinite { Termination::NonFinite { t } } else { Termination::StepUnderflow { t } };
            return (term, st);
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let tph = t + h;
        f(tph, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(tph, &ynew, &mut k7);
        st.evals += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = (err / n as f64).sqrt();

        let finite = err.is_finite() && all_finite(&ynew) && all_finite(&k7);
        if !finite {
            last_fail_nonfinite = true;
            st.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err > 1.0 {
            last_fail_nonfinite = false;
            st.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        if !admissible(&y, &ynew) {
            last_fail_nonfinite = false;
            st.rejected += 1;
            h *= 0.5;
            continue;
        }
        last_fail_nonfinite = false;
        st.accepted += 1;

        let mut r = [y.clone(), vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let ydiff = ynew[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let step = DenseStep { t0: t, h, r };
        let t_new = if last { t_end } else { tph };
        let go_on = on_step(&step, &ynew, &k7);
        t = t_new;
        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut k1, &mut k7);
        if !go_on {
            return (Termination::Stopped { t }, st);
        }
        let fac = (0.9 * err.max(1e-300).powf(-0.2)).clamp(0.2, 10.0);
        h = (h * fac).min(opts.h_max);
    }
    (Termination::Completed, st)
}

fn initial_step<F: FnMut(f64, &[f64], &mut [f64])>(
    f: &mut F,
    t: f64,
    y: &[f64],
    k1: &[f64],
    opts: &Dopri5Options,
    st: &mut Stats,
) -> f64 {
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| (v.iter().zip(&sk).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / n as f64).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * k1[i]).collect();
    let mut k2 = vec![0.0; n];
    f(t + h0, &y1, &mut k2);
    st.evals += 1;
    let diff: Vec<f64> = (0..n).map(|i| k2[i] - k1[i]).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    let h = (100.0 * h0).min(h1);
    if h.is_finite() && h > 0.0 { h } else { 1e-6 }
}
