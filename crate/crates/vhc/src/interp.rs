//! Four-point Lagrange interpolation on uniform grids.

/// Weights of the cubic through nodes at offsets -1, 0, 1, 2 evaluated at
/// fraction `u` in [0, 1] of the central cell.
#[inline]
fn weights(u: f64) -> [f64; 4] {
    let um1 = u - 1.0;
    let um2 = u - 2.0;
    let up1 = u + 1.0;
    [
        -u * um1 * um2 / 6.0,
        up1 * um1 * um2 / 2.0,
        -up1 * u * um2 / 2.0,
        up1 * u * um1 / 6.0,
    ]
}

/// Derivative (with respect to `u`) of the weights above.
#[inline]
fn dweights(u: f64) -> [f64; 4] {
    [
        -(3.0 * u * u - 6.0 * u + 2.0) / 6.0,
        (3.0 * u * u - 4.0 * u - 1.0) / 2.0,
        -(3.0 * u * u - 2.0 * u - 2.0) / 2.0,
        (3.0 * u * u - 1.0) / 6.0,
    ]
}

/// Samples of a `period`-periodic function at `k * period / n`, `k = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSamples {
    period: f64,
    values: Vec<f64>,
}

impl PeriodicSamples {
    pub fn new(period: f64, values: Vec<f64>) -> Self {
        assert!(period > 0.0 && values.len() >= 4, "periodic grid needs a positive period and >= 4 samples");
        PeriodicSamples { period, values }
    }

    pub fn from_fn(period: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let h = period / n as f64;
        Self::new(period, (0..n).map(|k| f(k as f64 * h)).collect())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.values.len();
        let h = self.step();
        let r = x.rem_euclid(self.period) / h;
        let mut i = r.floor() as usize;
        let mut u = r - i as f64;
        if i >= n {
            i = 0;
            u = 0.0;
        }
        (i, u)
    }

    fn stencil(&self, i: usize) -> [f64; 4] {
        let n = self.values.len();
        [
            self.values[(i + n - 1) % n],
            self.values[i],
            self.values[(i + 1) % n],
            self.values[(i + 2) % n],
        ]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let w = weights(u);
        let y = self.stencil(i);
        w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3]
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let w = dweights(u);
        let y = self.stencil(i);
        (w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3]) / self.step()
    }
}

/// Samples at `x0 + k h`, `k = 0..n`, with one-sided stencils at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

impl UniformSamples {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        assert!(h > 0.0 && values.len() >= 4, "uniform grid needs a positive step and >= 4 samples");
        UniformSamples { x0, h, values }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_end(&self) -> f64 {
        self.x0 + self.h * (self.values.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.values.len();
        let r = (x - self.x0) / self.h;
        // stencil start j covers nodes j..j+3, centre cell [j+1, j+2]
        let cell = r.floor().clamp(0.0, (n - 2) as f64) as usize;
        let j = cell.saturating_sub(1).min(n - 4);
        (j, r - (j + 1) as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (j, u) = self.locate(x);
        let w = weights(u);
        let y = &self.values[j..j + 4];
        w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3]
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let (j, u) = self.locate(x);
        let w = dweights(u);
        let y = &self.values[j..j + 4];
        (w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3]) / self.h
    }
}
