//! One-parameter optimal protocols.
//!
//! In one dimension the geodesic of g_α runs at λ̇ ∝ g_α^{−1/2}, so the
//! optimal protocol is fixed by the thermodynamic length
//! L = ∫ sqrt(g_α) |dλ|: the cost is C = L²/τ and the clock is
//! t(λ) = τ T(λ)/L with T the arclength from the start.
//!
//! The λ-nodes are placed at equal arclength (from a coarse pilot table), so
//! the resolution follows the metric where it varies fastest. Arclength is
//! integrated with Simpson per interval using a metric sample at each
//! λ-midpoint.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{check_alpha, MetricPair, MetricSource};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, HermiteSpline};

/// Metric samples along a monotone list of λ values (one parameter).
#[derive(Debug, Clone)]
pub struct MetricTable {
    pub lambda: Vec<f64>,
    pub fluctuation: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl MetricTable {
    /// Evaluates the metrics at every λ in parallel.
    pub fn build<M: MetricSource + ?Sized>(source: &M, lambda: Vec<f64>) -> Result<Self> {
        require_one_parameter(source)?;
        let pairs: Vec<MetricPair> = lambda
            .par_iter()
            .map(|&l| source.metric_pair(&[l]))
            .collect::<Result<_>>()?;
        Ok(Self {
            fluctuation: pairs.iter().map(|p| p.fluctuation[(0, 0)]).collect(),
            dissipation: pairs.iter().map(|p| p.dissipation[(0, 0)]).collect(),
            lambda,
        })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn alpha(&self, alpha: f64) -> Vec<f64> {
        self.fluctuation
            .iter()
            .zip(&self.dissipation)
            .map(|(l, x)| alpha * l + (1.0 - alpha) * x)
            .collect()
    }
}

fn require_one_parameter<M: MetricSource + ?Sized>(source: &M) -> Result<()> {
    if source.n_params() != 1 {
        return Err(Error::Domain(format!(
            "one-parameter solver called on a {}-parameter metric",
            source.n_params()
        )));
    }
    Ok(())
}

fn positive_metric(g: &[f64], lambda: &[f64]) -> Result<()> {
    for (v, l) in g.iter().zip(lambda) {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Singular(format!("metric is not positive at λ = {l} (g = {v:.3e})")));
        }
    }
    Ok(())
}

/// ∫ f over [0, h/2] and [h/2, h] from samples at 0, h/2, h (quadratic fit).
fn half_interval_integrals(f0: f64, fm: f64, f1: f64, h: f64) -> (f64, f64) {
    let q = h / 24.0;
    (q * (5.0 * f0 + 8.0 * fm - f1), q * (-f0 + 8.0 * fm + 5.0 * f1))
}

/// Optimal one-parameter protocol for g_α between two endpoints.
#[derive(Debug, Clone)]
pub struct GeodesicSolution {
    pub alpha: f64,
    pub tau: f64,
    pub start: f64,
    pub end: f64,
    /// Thermodynamic length L = ∫ sqrt(g_α) |dλ|.
    pub length: f64,
    /// C_α = L²/τ.
    pub cost: f64,
    /// βσ²/2 along the protocol.
    pub sigma_tilde2: f64,
    /// W_diss along the protocol.
    pub w_diss: f64,
    /// Knot times, ascending from 0 to τ.
    pub times: Vec<f64>,
    /// λ at each knot in traversal order.
    pub lambdas: Vec<f64>,
    /// λ̇ at each knot.
    pub velocities: Vec<f64>,
    /// g_α at each knot.
    pub metric: Vec<f64>,
    spline: Option<HermiteSpline>,
}

impl GeodesicSolution {
    fn stationary(alpha: f64, tau: f64, at: f64) -> Self {
        Self {
            alpha,
            tau,
            start: at,
            end: at,
            length: 0.0,
            cost: 0.0,
            sigma_tilde2: 0.0,
            w_diss: 0.0,
            times: vec![0.0, tau],
            lambdas: vec![at, at],
            velocities: vec![0.0, 0.0],
            metric: Vec::new(),
            spline: None,
        }
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        match &self.spline {
            Some(s) => s.eval(t.clamp(0.0, self.tau)),
            None => self.start,
        }
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        match &self.spline {
            Some(s) => s.derivative(t.clamp(0.0, self.tau)),
            None => 0.0,
        }
    }

    /// `n` equally spaced samples (t, λ, λ̇), n ≥ 2.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = self.tau * k as f64 / (n - 1) as f64;
                (t, self.lambda_at(t), self.velocity_at(t))
            })
            .collect()
    }

    /// ∫₀^τ f(λ_t) dt by 4-point Gauss–Legendre on every knot interval.
    pub fn time_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = gauss_legendre(4);
        self.times
            .windows(2)
            .map(|iv| {
                let (a, b) = (iv[0], iv[1]);
                let half = 0.5 * (b - a);
                x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * f(self.lambda_at(a + half * (xi + 1.0))))
                    .sum::<f64>()
                    * half
            })
            .sum()
    }
}

/// Optimal protocol λ_t for g_α = αΛ + (1 − α)ξ from `endpoints.0` to
/// `endpoints.1` in time τ, resolved on `grid` equal-arclength intervals.
pub fn optimal_velocity_1d<M: MetricSource + ?Sized>(
    source: &M,
    alpha: f64,
    endpoints: (f64, f64),
    tau: f64,
    grid: usize,
) -> Result<GeodesicSolution> {
    require_one_parameter(source)?;
    check_alpha(alpha)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Domain(format!("protocol duration must be > 0, got {tau}")));
    }
    if grid < 8 {
        return Err(Error::Domain(format!("geodesic grid needs ≥ 8 intervals, got {grid}")));
    }
    let (l0, l1) = endpoints;
    if !(l0.is_finite() && l1.is_finite()) {
        return Err(Error::Domain("geodesic endpoints must be finite".into()));
    }
    if l0 == l1 {
        return Ok(GeodesicSolution::stationary(alpha, tau, l0));
    }
    let (lo, hi) = (l0.min(l1), l0.max(l1));

    // Pilot table on a uniform grid fixes where the nodes go.
    let pilot_n = (grid / 4).max(16);
    let pilot_l: Vec<f64> = (0..=pilot_n)
        .map(|k| lo + (hi - lo) * k as f64 / pilot_n as f64)
        .collect();
    let pilot = MetricTable::build(source, pilot_l)?;
    let pilot_g = pilot.alpha(alpha);
    positive_metric(&pilot_g, &pilot.lambda)?;
    let root: Vec<f64> = pilot_g.iter().map(|g| g.sqrt()).collect();
    let mut arc = vec![0.0; pilot_n + 1];
    for k in 0..pilot_n {
        let h = pilot.lambda[k + 1] - pilot.lambda[k];
        // trapezoid in the log keeps the pilot arclength sane where g varies
        // over decades within one pilot cell
        let mean = if root[k] > 0.0 && root[k + 1] > 0.0 && (root[k] - root[k + 1]).abs() > 1e-12 * root[k] {
            (root[k + 1] - root[k]) / (root[k + 1] / root[k]).ln()
        } else {
            0.5 * (root[k] + root[k + 1])
        };
        arc[k + 1] = arc[k] + h * mean;
    }
    let inverse = HermiteSpline::monotone(
        arc.clone(),
        pilot.lambda.clone(),
        root.iter().map(|r| 1.0 / r).collect(),
    )?;
    let total = arc[pilot_n];
    let mut nodes: Vec<f64> = (0..=grid)
        .map(|k| inverse.eval(total * k as f64 / grid as f64))
        .collect();
    nodes[0] = lo;
    nodes[grid] = hi;
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Convergence(
            "equal-arclength node placement produced a non-monotone grid".into(),
        ));
    }

    // Nodes and midpoints: 2·grid + 1 samples.
    let mut lambda = Vec::with_capacity(2 * grid + 1);
    for k in 0..grid {
        lambda.push(nodes[k]);
        lambda.push(0.5 * (nodes[k] + nodes[k + 1]));
    }
    lambda.push(nodes[grid]);
    let table = MetricTable::build(source, lambda)?;
    let g = table.alpha(alpha);
    positive_metric(&g, &table.lambda)?;
    let sq: Vec<f64> = g.iter().map(|v| v.sqrt()).collect();
    let fl: Vec<f64> = table.fluctuation.iter().zip(&sq).map(|(l, s)| l / s).collect();
    let di: Vec<f64> = table.dissipation.iter().zip(&sq).map(|(x, s)| x / s).collect();

    let m = table.len();
    let mut arclength = vec![0.0; m];
    let (mut int_fl, mut int_di) = (0.0, 0.0);
    for k in 0..grid {
        let (a, b, c) = (2 * k, 2 * k + 1, 2 * k + 2);
        let h = table.lambda[c] - table.lambda[a];
        let (first, second) = half_interval_integrals(sq[a], sq[b], sq[c], h);
        arclength[b] = arclength[a] + first;
        arclength[c] = arclength[b] + second;
        int_fl += h / 6.0 * (fl[a] + 4.0 * fl[b] + fl[c]);
        int_di += h / 6.0 * (di[a] + 4.0 * di[b] + di[c]);
    }
    let length = arclength[m - 1];
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Singular(format!("thermodynamic length is {length}")));
    }

    // Traversal order: from l0 to l1.
    let forward = l1 > l0;
    let order: Vec<usize> = if forward { (0..m).collect() } else { (0..m).rev().collect() };
    let direction = if forward { 1.0 } else { -1.0 };
    let mut times: Vec<f64> = order
        .iter()
        .map(|&i| {
            let along = if forward { arclength[i] } else { length - arclength[i] };
            tau * along / length
        })
        .collect();
    times[0] = 0.0;
    times[m - 1] = tau;
    let lambdas: Vec<f64> = order.iter().map(|&i| table.lambda[i]).collect();
    let velocities: Vec<f64> = order.iter().map(|&i| direction * length / (tau * sq[i])).collect();
    let metric: Vec<f64> = order.iter().map(|&i| g[i]).collect();
    let spline = HermiteSpline::new(times.clone(), lambdas.clone(), velocities.clone())?;

    Ok(GeodesicSolution {
        alpha,
        tau,
        start: l0,
        end: l1,
        length,
        cost: length * length / tau,
        sigma_tilde2: length / tau * int_fl,
        w_diss: length / tau * int_di,
        times,
        lambdas,
        velocities,
        metric,
        spline: Some(spline),
    })
}

/// max over interior knots of |2λ̈g + g'λ̇²| / (λ̇²(|g'| + g/ℓ)), with
/// ℓ = |λ_τ − λ₀|, λ̈ and g' = dg/dλ from three-point differences on the
/// knots.
pub fn euler_lagrange_residual(sol: &GeodesicSolution) -> f64 {
    let n = sol.times.len();
    if n < 3 || sol.metric.len() != n {
        return 0.0;
    }
    let span = (sol.end - sol.start).abs();
    let deriv3 = |x: [f64; 3], y: [f64; 3]| {
        let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
        (-h1 / (h0 * (h0 + h1))) * y[0] + ((h1 - h0) / (h0 * h1)) * y[1] + (h0 / (h1 * (h0 + h1))) * y[2]
    };
    (1..n - 1)
        .map(|k| {
            let t = [sol.times[k - 1], sol.times[k], sol.times[k + 1]];
            let v = [sol.velocities[k - 1], sol.velocities[k], sol.velocities[k + 1]];
            let l = [sol.lambdas[k - 1], sol.lambdas[k], sol.lambdas[k + 1]];
            let gg = [sol.metric[k - 1], sol.metric[k], sol.metric[k + 1]];
            let accel = deriv3(t, v);
            let slope = deriv3(l, gg);
            let v2 = v[1] * v[1];
            (2.0 * accel * gg[1] + slope * v2).abs() / (v2 * (slope.abs() + gg[1] / span))
        })
        .fold(0.0, f64::max)
}

/// A control protocol λ_t, t ∈ [0, τ].
pub trait ControlPath: Sync {
    fn tau(&self) -> f64;
    fn n_params(&self) -> usize;
    fn point(&self, t: f64) -> Vec<f64>;
    fn velocity(&self, t: f64) -> Vec<f64>;
}

impl ControlPath for GeodesicSolution {
    fn tau(&self) -> f64 {
        self.tau
    }

    fn n_params(&self) -> usize {
        1
    }

    fn point(&self, t: f64) -> Vec<f64> {
        vec![self.lambda_at(t)]
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        vec![self.velocity_at(t)]
    }
}

/// Constant-velocity protocol.
#[derive(Debug, Clone)]
pub struct LinearRamp {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub tau: f64,
}

impl ControlPath for LinearRamp {
    fn tau(&self) -> f64 {
        self.tau
    }

    fn n_params(&self) -> usize {
        self.start.len()
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let s = t / self.tau;
        self.start.iter().zip(&self.end).map(|(a, b)| a + s * (b - a)).collect()
    }

    fn velocity(&self, _t: f64) -> Vec<f64> {
        self.start.iter().zip(&self.end).map(|(a, b)| (b - a) / self.tau).collect()
    }
}

/// βσ²/2, W_diss and C_α of a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCost {
    pub sigma_tilde2: f64,
    pub w_diss: f64,
    pub cost: f64,
}

fn quadratic_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += v[i] * m[(i, j)] * v[j];
        }
    }
    s
}

/// ∫ λ̇ᵀΛλ̇ and ∫ λ̇ᵀξλ̇ by Gauss–Legendre (8 nodes) on `panels` equal
/// time panels.
pub fn cost_of_path<M, P>(source: &M, path: &P, alpha: f64, panels: usize) -> Result<PathCost>
where
    M: MetricSource + ?Sized,
    P: ControlPath + ?Sized,
{
    check_alpha(alpha)?;
    if panels == 0 {
        return Err(Error::Domain("cost quadrature needs at least one panel".into()));
    }
    if path.n_params() != source.n_params() {
        return Err(Error::DimensionMismatch {
            expected: source.n_params(),
            found: path.n_params(),
        });
    }
    let (x, w) = gauss_legendre(8);
    let h = path.tau() / panels as f64;
    let parts: Vec<(f64, f64)> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let a = p as f64 * h;
            let mut acc = (0.0, 0.0);
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + 0.5 * h * (xi + 1.0);
                let pair = source.metric_pair(&path.point(t))?;
                let v = path.velocity(t);
                acc.0 += wi * quadratic_form(&pair.fluctuation, &v);
                acc.1 += wi * quadratic_form(&pair.dissipation, &v);
            }
            Ok((0.5 * h * acc.0, 0.5 * h * acc.1))
        })
        .collect::<Result<_>>()?;
    let (s, d) = parts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Ok(PathCost {
        sigma_tilde2: s,
        w_diss: d,
        cost: alpha * s + (1.0 - alpha) * d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// g(λ) = a(λ) for both metrics (α-independent).
    struct Scalar<F: Fn(f64) -> (f64, f64) + Sync>(F);

    impl<F: Fn(f64) -> (f64, f64) + Sync> MetricSource for Scalar<F> {
        fn n_params(&self) -> usize {
            1
        }
        fn metric_pair(&self, l: &[f64]) -> Result<MetricPair> {
            let (a, b) = (self.0)(l[0]);
            Ok(MetricPair {
                fluctuation: DMatrix::from_element(1, 1, a),
                dissipation: DMatrix::from_element(1, 1, b),
            })
        }
    }

    #[test]
    fn flat_metric_gives_linear_ramp() {
        let m = Scalar(|_| (2.0, 2.0));
        let sol = optimal_velocity_1d(&m, 0.5, (1.0, 3.0), 4.0, 64).unwrap();
        assert!((sol.length - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((sol.cost - 2.0).abs() < 1e-12);
        for (t, l, v) in sol.sample(11) {
            assert!((l - (1.0 + t / 2.0)).abs() < 1e-12);
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn power_law_metric_matches_closed_form() {
        // g = λ^{-2}: L = ln(λ1/λ0), λ_t = λ0 (λ1/λ0)^{t/τ}
        let m = Scalar(|l| (1.0 / (l * l), 1.0 / (l * l)));
        let sol = optimal_velocity_1d(&m, 1.0, (0.1, 10.0), 2.0, 512).unwrap();
        let ln = (100.0f64).ln();
        assert!((sol.length - ln).abs() < 1e-10 * ln);
        for (t, l, _) in sol.sample(17) {
            let exact = 0.1 * (100.0f64).powf(t / 2.0);
            assert!((l - exact).abs() < 1e-8 * exact, "t = {t}: {l} vs {exact}");
        }
        assert!(euler_lagrange_residual(&sol) < 1e-4);
    }

    #[test]
    fn reversed_endpoints_traverse_backwards() {
        let m = Scalar(|l| (1.0 + l * l, 2.0 + l));
        let fwd = optimal_velocity_1d(&m, 0.3, (0.0, 2.0), 1.0, 128).unwrap();
        let back = optimal_velocity_1d(&m, 0.3, (2.0, 0.0), 1.0, 128).unwrap();
        assert!((fwd.cost - back.cost).abs() < 1e-12 * fwd.cost);
        assert!((back.lambda_at(0.0) - 2.0).abs() < 1e-14);
        assert!((back.lambda_at(1.0)).abs() < 1e-14);
        assert!(back.velocity_at(0.5) < 0.0);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((fwd.lambda_at(t) - back.lambda_at(1.0 - t)).abs() < 1e-9);
        }
    }

    #[test]
    fn cost_splits_into_fluctuation_and_dissipation() {
        let m = Scalar(|l| (1.0 + l, 3.0 - l));
        let sol = optimal_velocity_1d(&m, 0.25, (0.0, 1.0), 1.0, 256).unwrap();
        let mixed = 0.25 * sol.sigma_tilde2 + 0.75 * sol.w_diss;
        assert!((mixed - sol.cost).abs() < 1e-10 * sol.cost);
        let quad = cost_of_path(&m, &sol, 0.25, 200).unwrap();
        assert!((quad.cost - sol.cost).abs() < 1e-8 * sol.cost);
        assert!((quad.sigma_tilde2 - sol.sigma_tilde2).abs() < 1e-8 * sol.sigma_tilde2);
    }

    #[test]
    fn geodesic_beats_linear_ramp() {
        let m = Scalar(|l| ((1.0 + l).powi(-3), (1.0 + l).powi(-3)));
        let sol = optimal_velocity_1d(&m, 0.5, (0.0, 4.0), 1.0, 256).unwrap();
        let ramp = LinearRamp {
            start: vec![0.0],
            end: vec![4.0],
            tau: 1.0,
        };
        let lin = cost_of_path(&m, &ramp, 0.5, 200).unwrap();
        assert!(lin.cost > sol.cost);
    }

    #[test]
    fn stationary_and_invalid_inputs() {
        let m = Scalar(|_| (1.0, 1.0));
        let s = optimal_velocity_1d(&m, 0.5, (1.0, 1.0), 1.0, 64).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.lambda_at(0.3), 1.0);
        assert!(matches!(optimal_velocity_1d(&m, 1.5, (0.0, 1.0), 1.0, 64), Err(Error::Domain(_))));
        assert!(matches!(optimal_velocity_1d(&m, 0.5, (0.0, 1.0), 0.0, 64), Err(Error::Domain(_))));
        let bad = Scalar(|l| (l, l));
        assert!(matches!(optimal_velocity_1d(&bad, 0.5, (-1.0, 1.0), 1.0, 64), Err(Error::Singular(_))));
    }
}
