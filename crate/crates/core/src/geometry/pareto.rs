//! Fluctuation/dissipation trade-off fronts.
//!
//! Each α ∈ [0, 1] gives the g_α geodesic; the pair (βσ²/2, W_diss) along it
//! traces the achievable front. α = 1 minimises the fluctuations, α = 0 the
//! dissipation.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use super::{optimal_velocity_1d, MetricSource};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub alpha: f64,
    /// βσ²/2 along the g_α geodesic.
    pub sigma_tilde2: f64,
    pub w_diss: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct ParetoFront {
    pub tau: f64,
    /// Points in increasing α.
    pub points: Vec<ParetoPoint>,
    /// α values whose geodesic failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl ParetoFront {
    /// min over the front of (βσ²/2 − W_diss)/√2: distance to the line
    /// βσ²/2 = W_diss.
    pub fn distance_to_diagonal(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.sigma_tilde2 - p.w_diss) / SQRT_2)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest violation of "βσ²/2 non-increasing and W_diss non-decreasing
    /// in α", relative to the local magnitude (0 if monotone).
    pub fn monotonicity_defect(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let ds = (w[1].sigma_tilde2 - w[0].sigma_tilde2) / w[0].sigma_tilde2.abs().max(f64::MIN_POSITIVE);
                let dw = (w[0].w_diss - w[1].w_diss) / w[0].w_diss.abs().max(f64::MIN_POSITIVE);
                ds.max(dw).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Largest W_diss − βσ²/2 over the front (≤ 0 when fluctuations dominate).
    pub fn worst_fdr_excess(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.w_diss - p.sigma_tilde2)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `n_alpha` equally spaced α ∈ [0, 1]; a single value sits at α = ½.
pub fn alpha_grid(n_alpha: usize) -> Result<Vec<f64>> {
    match n_alpha {
        0 => return Err(Error::Domain("α grid needs at least one value".into())),
        1 => return Ok(vec![0.5]),
        _ => {}
    }
    Ok((0..n_alpha).map(|k| k as f64 / (n_alpha - 1) as f64).collect())
}

/// Front from one-parameter geodesics at each α in `alphas`. Individual
/// failures are recorded; the call fails only if every α fails.
pub fn pareto_front<M: MetricSource + ?Sized>(
    source: &M,
    endpoints: (f64, f64),
    tau: f64,
    alphas: &[f64],
    grid: usize,
) -> Result<ParetoFront> {
    if alphas.is_empty() {
        return Err(Error::Domain("Pareto front needs at least one α".into()));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let outcomes: Vec<(f64, Result<ParetoPoint>)> = sorted
        .par_iter()
        .map(|&alpha| {
            let r = optimal_velocity_1d(source, alpha, endpoints, tau, grid).map(|g| ParetoPoint {
                alpha,
                sigma_tilde2: g.sigma_tilde2,
                w_diss: g.w_diss,
                cost: g.cost,
            });
            (alpha, r)
        })
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (alpha, r) in outcomes {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                log::warn!("geodesic at α = {alpha} failed: {e}");
                failures.push((alpha, e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    if points.is_empty() {
        return Err(first_error.expect("at least one α was attempted"));
    }
    Ok(ParetoFront { tau, points, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricPair;
    use nalgebra::DMatrix;

    struct Toy;

    impl MetricSource for Toy {
        fn n_params(&self) -> usize {
            1
        }
        fn metric_pair(&self, l: &[f64]) -> Result<MetricPair> {
            let x = l[0];
            Ok(MetricPair {
                fluctuation: DMatrix::from_element(1, 1, 1.0 + x * x),
                dissipation: DMatrix::from_element(1, 1, 1.0 + 0.5 * x),
            })
        }
    }

    #[test]
    fn front_is_monotone_and_endpoints_are_optimal() {
        let front = pareto_front(&Toy, (0.0, 2.0), 1.0, &alpha_grid(11).unwrap(), 128).unwrap();
        assert!(front.failures.is_empty());
        assert_eq!(front.points.len(), 11);
        assert!(front.monotonicity_defect() < 1e-10);
        let min_w = front.points.iter().map(|p| p.w_diss).fold(f64::INFINITY, f64::min);
        assert!((front.points[0].w_diss - min_w).abs() < 1e-12);
    }

    #[test]
    fn alpha_grid_validation() {
        assert!(alpha_grid(0).is_err());
        assert_eq!(alpha_grid(1).unwrap(), vec![0.5]);
        assert_eq!(alpha_grid(3).unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
