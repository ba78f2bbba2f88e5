//! Quadrature and interpolation utilities.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Composite Simpson weights for `n` (odd, ≥ 3) equally spaced points with
/// spacing `h`.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Domain(format!("Simpson rule needs an odd point count ≥ 3, got {n}")));
    }
    Ok((0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect())
}

pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let w = simpson_weights(values.len(), h)?;
    Ok(values.iter().zip(&w).map(|(v, w)| v * w).sum())
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

/// Stopping rule for [`refine_simpson`].
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    pub rel_tol: f64,
    pub max_points: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            max_points: 4097,
        }
    }
}

/// Result of an adaptive Simpson integration of several components.
#[derive(Debug, Clone)]
pub struct Refined<const K: usize> {
    pub values: [f64; K],
    pub points: usize,
    pub converged: bool,
}

/// Integrates K components of `f` over [a, b] with composite Simpson,
/// doubling the grid (and reusing old samples) until every component changes
/// by less than `rel_tol` relative to its own magnitude, with a floor of
/// `rel_tol·1e-6` times the largest component.
///
/// Samples are evaluated in parallel; sums are ordered, so results are
/// independent of the thread count.
pub fn refine_simpson<const K: usize, F>(
    a: f64,
    b: f64,
    start_points: usize,
    rule: Refinement,
    f: F,
) -> Result<Refined<K>>
where
    F: Fn(f64) -> Result<[f64; K]> + Sync,
{
    if start_points < 3 {
        return Err(Error::Domain(format!("quadrature grid needs ≥ 3 points, got {start_points}")));
    }
    let mut n = if start_points % 2 == 0 { start_points + 1 } else { start_points };
    let at = |n: usize, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut samples: Vec<[f64; K]> = (0..n)
        .into_par_iter()
        .map(|i| f(at(n, i)))
        .collect::<Result<_>>()?;
    let integrate = |s: &[[f64; K]], n: usize| -> Result<[f64; K]> {
        let w = simpson_weights(n, (b - a) / (n - 1) as f64)?;
        let mut out = [0.0; K];
        for (row, wi) in s.iter().zip(&w) {
            for k in 0..K {
                out[k] += wi * row[k];
            }
        }
        Ok(out)
    };
    let mut current = integrate(&samples, n)?;
    loop {
        let next_n = 2 * (n - 1) + 1;
        if next_n > rule.max_points {
            return Ok(Refined {
                values: current,
                points: n,
                converged: false,
            });
        }
        let fresh: Vec<[f64; K]> = (0..n - 1)
            .into_par_iter()
            .map(|i| f(at(next_n, 2 * i + 1)))
            .collect::<Result<_>>()?;
        let mut merged = Vec::with_capacity(next_n);
        for i in 0..n - 1 {
            merged.push(samples[i]);
            merged.push(fresh[i]);
        }
        merged.push(samples[n - 1]);
        let next = integrate(&merged, next_n)?;
        let scale = next.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let done = (0..K).all(|k| {
            (next[k] - current[k]).abs() <= rule.rel_tol * (next[k].abs() + 1e-6 * scale)
        });
        samples = merged;
        n = next_n;
        current = next;
        if done {
            return Ok(Refined {
                values: current,
                points: n,
                converged: true,
            });
        }
    }
}

/// Piecewise cubic Hermite interpolant through (x_i, y_i) with slopes y'_i.
#[derive(Debug, Clone)]
pub struct HermiteSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl HermiteSpline {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() != x.len() || dy.len() != x.len() {
            return Err(Error::Domain("spline needs ≥ 2 points and matching lengths".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spline abscissae must increase strictly".into()));
        }
        Ok(Self { x, y, dy })
    }

    /// Monotone variant: slopes limited so the interpolant cannot overshoot
    /// monotone data (Fritsch–Carlson).
    pub fn monotone(x: Vec<f64>, y: Vec<f64>, mut dy: Vec<f64>) -> Result<Self> {
        for i in 0..x.len().saturating_sub(1) {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if delta == 0.0 {
                dy[i] = 0.0;
                dy[i + 1] = 0.0;
                continue;
            }
            let a = dy[i] / delta;
            let b = dy[i + 1] / delta;
            if a < 0.0 {
                dy[i] = 0.0;
            }
            if b < 0.0 {
                dy[i + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                dy[i] = t * a * delta;
                dy[i + 1] = t * b * delta;
            }
        }
        Self::new(x, y, dy)
    }

    /// Slopes from three-point finite differences.
    pub fn with_estimated_slopes(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 {
            return Err(Error::Domain("spline needs ≥ 2 points".into()));
        }
        let mut dy = vec![0.0; n];
        if n == 2 {
            let s = (y[1] - y[0]) / (x[1] - x[0]);
            dy = vec![s, s];
        } else {
            for i in 0..n {
                let (a, b, c) = if i == 0 {
                    (0, 1, 2)
                } else if i == n - 1 {
                    (n - 3, n - 2, n - 1)
                } else {
                    (i - 1, i, i + 1)
                };
                // derivative of the quadratic through three points, at x_i
                let (x0, x1, x2) = (x[a], x[b], x[c]);
                let (y0, y1, y2) = (y[a], y[b], y[c]);
                let t = x[i];
                dy[i] = y0 * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
                    + y1 * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
                    + y2 * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1));
            }
        }
        Self::new(x, y, dy)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.dy
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and first derivative; extrapolates with the end cubics.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let deriv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (value, deriv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).1
    }
}
