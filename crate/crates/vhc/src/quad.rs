//! Adaptive Simpson quadrature.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}] within the subdivision budget")]
    NonConvergence { a: f64, b: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
}

/// Tuning for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    /// Absolute error target for the whole interval.
    pub tol: f64,
    pub max_depth: u32,
    /// Levels that are always subdivided regardless of the error estimate.
    pub min_depth: u32,
    /// Upper bound on integrand evaluations.
    pub max_evals: usize,
}

impl SimpsonOptions {
    pub fn with_tol(tol: f64) -> Self {
        SimpsonOptions { tol, max_depth: 48, min_depth: 0, max_evals: 2_000_000 }
    }
}

struct State<'f, F> {
    f: &'f mut F,
    evals: usize,
    opts: SimpsonOptions,
}

impl<F: FnMut(f64) -> f64> State<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64, QuadError> {
        self.evals += 1;
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, QuadError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= self.opts.min_depth && delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.opts.max_depth || self.evals >= self.opts.max_evals || m <= a || m >= b {
            return Err(QuadError::NonConvergence { a, b });
        }
        let l = self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `opts.tol` with
/// Richardson-corrected adaptive Simpson.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: SimpsonOptions,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let mut st = State { f, evals: 0, opts };
    let fa = st.eval(a)?;
    let fb = st.eval(b)?;
    let m = 0.5 * (a + b);
    let fm = st.eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    st.recurse(a, b, fa, fm, fb, whole, opts.tol, 0)
}

/// Composite Simpson over uniformly spaced samples (odd count).
pub fn simpson_samples(ys: &[f64], h: f64) -> f64 {
    assert!(ys.len() >= 3 && ys.len() % 2 == 1, "need an odd number of samples");
    let n = ys.len() - 1;
    let mut s = ys[0] + ys[n];
    for (i, y) in ys.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let got = adaptive_simpson(&mut |x: f64| x.sin(), 0.0, std::f64::consts::PI, SimpsonOptions::with_tol(1e-12))
            .unwrap();
        assert!((got - 2.0).abs() < 1e-12);
        let got = adaptive_simpson(&mut |x: f64| (-x * x).exp(), -6.0, 6.0, SimpsonOptions::with_tol(1e-12)).unwrap();
        assert!((got - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let f = |x: f64| x * x;
        let a = adaptive_simpson(&mut { f }, 0.0, 2.0, SimpsonOptions::with_tol(1e-12)).unwrap();
        let b = adaptive_simpson(&mut { f }, 2.0, 0.0, SimpsonOptions::with_tol(1e-12)).unwrap();
        assert!((a + b).abs() < 1e-14);
        assert!((a - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn reports_non_finite_integrand() {
        let r = adaptive_simpson(&mut |x: f64| 1.0 / x, 0.0, 1.0, SimpsonOptions::with_tol(1e-8));
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn reports_budget_exhaustion() {
        let opts = SimpsonOptions { tol: 1e-14, max_depth: 3, min_depth: 0, max_evals: 10_000 };
        let r = adaptive_simpson(&mut |x: f64| (50.0 * x).sin().abs(), 0.0, 1.0, opts);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. })));
    }

    #[test]
    fn composite_samples_are_exact_for_cubics() {
        let h = 0.1;
        let ys: Vec<f64> = (0..11).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson_samples(&ys, h) - 0.25).abs() < 1e-14);
    }
}
