//! Multi-parameter geodesics by shooting.
//!
//! Solves λ̈^k + Γ^k_ij λ̇^i λ̇^j = 0 on s ∈ [0, 1] with RK4, Christoffel
//! symbols from central differences of g_α, and Newton on the initial
//! velocity. The endpoint mismatch is reported rather than hidden: this is a
//! best-effort solver for smooth, well-conditioned metrics.

use nalgebra::{DMatrix, DVector};

use super::{check_alpha, MetricSource};
use crate::error::{Error, Result};

const NEWTON_ITERATIONS: usize = 30;

/// Shooting result in physical time t = τs.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub alpha: f64,
    pub tau: f64,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// C_α = ∫ λ̇ᵀ g_α λ̇ dt by Simpson over the RK4 grid.
    pub cost: f64,
    /// |λ(τ) − λ_τ| after the last Newton step.
    pub endpoint_error: f64,
    /// max over the grid of |λ̇ᵀgλ̇ − mean| / mean (zero for an exact geodesic).
    pub speed_variation: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a, M: MetricSource + ?Sized> {
    source: &'a M,
    alpha: f64,
    n: usize,
}

impl<M: MetricSource + ?Sized> Problem<'_, M> {
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.source.metric_pair(x)?.alpha(self.alpha))
    }

    /// v̇^k = −Γ^k_ij v^i v^j.
    fn acceleration(&self, x: &[f64], v: &[f64]) -> Result<DVector<f64>> {
        let n = self.n;
        let g = self.metric(x)?;
        let mut dg = Vec::with_capacity(n);
        for l in 0..n {
            let eta = 1e-5 * x[l].abs().max(1.0);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[l] += eta;
            xm[l] -= eta;
            dg.push((self.metric(&xp)? - self.metric(&xm)?) / (2.0 * eta));
        }
        // b_l = Σ_ij (∂_i g_lj − ½ ∂_l g_ij) v^i v^j
        let mut b = DVector::zeros(n);
        for l in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += (dg[i][(l, j)] - 0.5 * dg[l][(i, j)]) * v[i] * v[j];
                }
            }
            b[l] = -s;
        }
        g.lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular(format!("metric is singular at λ = {x:?}")))
    }

    /// RK4 trajectory from (x0, v0) over `steps` steps of s ∈ [0, 1].
    fn integrate(&self, x0: &[f64], v0: &[f64], steps: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = self.n;
        let h = 1.0 / steps as f64;
        let mut xs = vec![x0.to_vec()];
        let mut vs = vec![v0.to_vec()];
        let add = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        for _ in 0..steps {
            let x = xs.last().expect("non-empty").clone();
            let v = vs.last().expect("non-empty").clone();
            let a1 = self.acceleration(&x, &v)?;
            let (x2, v2) = (add(&x, &v, 0.5 * h), add(&v, a1.as_slice(), 0.5 * h));
            let a2 = self.acceleration(&x2, &v2)?;
            let (x3, v3) = (add(&x, &v2, 0.5 * h), add(&v, a2.as_slice(), 0.5 * h));
            let a3 = self.acceleration(&x3, &v3)?;
            let (x4, v4) = (add(&x, &v3, h), add(&v, a3.as_slice(), h));
            let a4 = self.acceleration(&x4, &v4)?;
            let mut xn = x.clone();
            let mut vn = v.clone();
            for k in 0..n {
                xn[k] += h / 6.0 * (v[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]);
                vn[k] += h / 6.0 * (a1[k] + 2.0 * a2[k] + 2.0 * a3[k] + a4[k]);
            }
            if xn.iter().chain(&vn).any(|z| !z.is_finite()) {
                return Err(Error::Convergence("geodesic integration diverged".into()));
            }
            xs.push(xn);
            vs.push(vn);
        }
        Ok((xs, vs))
    }
}

/// Geodesic of g_α from `start` to `end` in time τ by shooting on `steps`
/// RK4 steps (rounded up to even).
pub fn geodesic_shooting<M: MetricSource + ?Sized>(
    source: &M,
    alpha: f64,
    start: &[f64],
    end: &[f64],
    tau: f64,
    steps: usize,
) -> Result<ShootingSolution> {
    check_alpha(alpha)?;
    let n = source.n_params();
    if start.len() != n || end.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if start.len() != n { start.len() } else { end.len() },
        });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Domain(format!("protocol duration must be > 0, got {tau}")));
    }
    if steps < 4 {
        return Err(Error::Domain(format!("shooting needs ≥ 4 steps, got {steps}")));
    }
    let steps = steps + steps % 2;
    let problem = Problem { source, alpha, n };
    let span: f64 = start.iter().zip(end).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    let tol = 1e-10 * (1.0 + span);

    let mismatch = |v0: &[f64]| -> Result<(DVector<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let (xs, vs) = problem.integrate(start, v0, steps)?;
        let last = xs.last().expect("non-empty");
        let f = DVector::from_iterator(n, last.iter().zip(end).map(|(a, b)| a - b));
        Ok((f, xs, vs))
    };

    let mut v0: Vec<f64> = start.iter().zip(end).map(|(a, b)| b - a).collect();
    let (mut f, mut xs, mut vs) = mismatch(&v0)?;
    let mut iterations = 0;
    while f.norm() > tol && iterations < NEWTON_ITERATIONS {
        iterations += 1;
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let eps = 1e-7 * (v0[c].abs() + 1.0);
            let mut vp = v0.clone();
            vp[c] += eps;
            let (fp, _, _) = mismatch(&vp)?;
            jac.set_column(c, &((fp - &f) / eps));
        }
        let step = jac
            .lu()
            .solve(&(-&f))
            .ok_or_else(|| Error::Singular("shooting Jacobian is singular".into()))?;
        // damped update: halve until the mismatch decreases
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = v0.iter().zip(step.iter()).map(|(v, d)| v + scale * d).collect();
            match mismatch(&trial) {
                Ok((ft, xt, vt)) if ft.norm() < f.norm() => {
                    v0 = trial;
                    f = ft;
                    xs = xt;
                    vs = vt;
                    break;
                }
                _ if scale > 1e-4 => scale *= 0.5,
                _ => {
                    return Err(Error::Convergence(format!(
                        "shooting stalled with endpoint error {:.3e}",
                        f.norm()
                    )))
                }
            }
        }
    }

    let speeds: Vec<f64> = xs
        .iter()
        .zip(&vs)
        .map(|(x, v)| {
            let g = problem.metric(x)?;
            let vv = DVector::from_column_slice(v);
            Ok((vv.transpose() * g * &vv)[(0, 0)])
        })
        .collect::<Result<_>>()?;
    let h = 1.0 / steps as f64;
    let energy = crate::quad::simpson(&speeds, h)?;
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let speed_variation = speeds
        .iter()
        .map(|s| (s - mean).abs() / mean.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);

    Ok(ShootingSolution {
        alpha,
        tau,
        times: (0..=steps).map(|k| tau * k as f64 / steps as f64).collect(),
        points: xs,
        velocities: vs.iter().map(|v| v.iter().map(|x| x / tau).collect()).collect(),
        cost: energy / tau,
        endpoint_error: f.norm(),
        speed_variation,
        iterations,
        converged: f.norm() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricPair;

    struct Diagonal;

    // g = diag(1/x², 1/x²) on the half plane x > 0 (hyperbolic)
    impl MetricSource for Diagonal {
        fn n_params(&self) -> usize {
            2
        }
        fn metric_pair(&self, l: &[f64]) -> Result<MetricPair> {
            let g = DMatrix::from_diagonal_element(2, 2, 1.0 / (l[0] * l[0]));
            Ok(MetricPair {
                fluctuation: g.clone(),
                dissipation: g,
            })
        }
    }

    #[test]
    fn hyperbolic_geodesic_length() {
        // vertical geodesic: length ln(x1/x0) along the x axis
        let sol = geodesic_shooting(&Diagonal, 0.5, &[1.0, 0.0], &[3.0, 0.0], 2.0, 200).unwrap();
        assert!(sol.converged);
        let l = 3f64.ln();
        assert!((sol.cost - l * l / 2.0).abs() < 1e-7);
        // (1, ±1) are at distance acosh(1 + |Δ|²/(2 x₁x₂)) = acosh(3)
        let sol = geodesic_shooting(&Diagonal, 0.5, &[1.0, -1.0], &[1.0, 1.0], 1.0, 400).unwrap();
        assert!(sol.converged);
        let d = 3f64.acosh();
        assert!((sol.cost - d * d).abs() < 1e-6 * d * d, "{} vs {}", sol.cost, d * d);
        assert!(sol.speed_variation < 1e-6);
    }

    #[test]
    fn rejects_mismatched_endpoints() {
        assert!(matches!(
            geodesic_shooting(&Diagonal, 0.5, &[1.0], &[1.0, 2.0], 1.0, 10),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
