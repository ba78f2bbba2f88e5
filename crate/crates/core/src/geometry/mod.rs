//! Thermodynamic metrics on control space and protocol optimisation.
//!
//! For H(λ) = X₀ + Σ λ_i X_i with Gibbs state π(λ):
//!
//! * Λ_ij = −(β/2) Tr[X_i ℒ⁺𝕊_π(X_j) + X_j ℒ⁺𝕊_π(X_i)]  (fluctuation)
//! * ξ_ij = −(β/2) Tr[X_i ℒ⁺𝕁_π(X_j) + X_j ℒ⁺𝕁_π(X_i)]  (dissipation)
//! * g_α = αΛ + (1 − α)ξ
//!
//! so that βσ²/2 = ∫ λ̇ᵀΛλ̇ dt and W_diss = ∫ λ̇ᵀξλ̇ dt.

mod geodesic;
mod multi;
mod pareto;

pub use geodesic::{
    cost_of_path, euler_lagrange_residual, optimal_velocity_1d, ControlPath, GeodesicSolution, LinearRamp,
    MetricTable, PathCost,
};
pub use multi::{geodesic_shooting, ShootingSolution};
pub use pareto::{alpha_grid, pareto_front, ParetoFront, ParetoPoint};

use nalgebra::DMatrix;

use crate::error::{check_dims, Error, Result};
use crate::lindblad::{drazin_inverse, GeneratorKind, Lindbladian};
use crate::operator::mean_images;
use crate::Hermitian;

/// Control parameters λ ∈ ℝⁿ mapped to Hamiltonians, conjugate forces and
/// generators.
pub trait ControlChart: Sync {
    fn n_params(&self) -> usize;
    fn beta(&self) -> f64;
    fn hamiltonian(&self, lambda: &[f64]) -> Result<Hermitian>;
    /// X_i = ∂H/∂λ_i at λ.
    fn forces(&self, lambda: &[f64]) -> Result<Vec<Hermitian>>;
    fn generator(&self, h: &Hermitian) -> Result<Lindbladian>;
}

/// H(λ) = X₀ + Σ λ_i X_i with a generator recipe.
#[derive(Debug, Clone)]
pub struct LinearChart {
    base: Hermitian,
    forces: Vec<Hermitian>,
    beta: f64,
    kind: GeneratorKind,
}

impl LinearChart {
    pub fn new(base: Hermitian, forces: Vec<Hermitian>, beta: f64, kind: GeneratorKind) -> Result<Self> {
        if forces.is_empty() {
            return Err(Error::Domain("chart needs at least one conjugate force".into()));
        }
        for x in &forces {
            check_dims(base.dim(), x.dim())?;
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("inverse temperature must be > 0, got {beta}")));
        }
        Ok(Self {
            base,
            forces,
            beta,
            kind,
        })
    }
}

impl ControlChart for LinearChart {
    fn n_params(&self) -> usize {
        self.forces.len()
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn hamiltonian(&self, lambda: &[f64]) -> Result<Hermitian> {
        check_dims(self.forces.len(), lambda.len())?;
        Ok(self
            .forces
            .iter()
            .zip(lambda)
            .fold(self.base.clone(), |h, (x, &l)| &h + &(x * l)))
    }

    fn forces(&self, lambda: &[f64]) -> Result<Vec<Hermitian>> {
        check_dims(self.forces.len(), lambda.len())?;
        Ok(self.forces.clone())
    }

    fn generator(&self, h: &Hermitian) -> Result<Lindbladian> {
        self.kind.build(h, self.beta)
    }
}

/// Λ and ξ at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPair {
    pub fluctuation: DMatrix<f64>,
    pub dissipation: DMatrix<f64>,
}

impl MetricPair {
    /// g_α = αΛ + (1 − α)ξ.
    pub fn alpha(&self, alpha: f64) -> DMatrix<f64> {
        &self.fluctuation * alpha + &self.dissipation * (1.0 - alpha)
    }
}

/// Anything that yields (Λ, ξ) at a point of an n-parameter control space.
pub trait MetricSource: Sync {
    fn n_params(&self) -> usize;
    fn metric_pair(&self, lambda: &[f64]) -> Result<MetricPair>;
}

impl<C: ControlChart> MetricSource for C {
    fn n_params(&self) -> usize {
        ControlChart::n_params(self)
    }

    fn metric_pair(&self, lambda: &[f64]) -> Result<MetricPair> {
        chart_metrics(self, lambda)
    }
}

/// Both metrics from one Drazin inverse.
pub fn chart_metrics<C: ControlChart + ?Sized>(chart: &C, lambda: &[f64]) -> Result<MetricPair> {
    let n = chart.n_params();
    check_dims(n, lambda.len())?;
    let h = chart.hamiltonian(lambda)?;
    let forces = chart.forces(lambda)?;
    check_dims(n, forces.len())?;
    let l = chart.generator(&h)?;
    let pi = l.stationary_state();
    let drazin = drazin_inverse(&l)?;
    let mut ys = Vec::with_capacity(n);
    let mut yj = Vec::with_capacity(n);
    for x in &forces {
        let im = mean_images(pi, x)?;
        ys.push(drazin.apply_hermitian(&im.s)?);
        yj.push(drazin.apply_hermitian(&im.j)?);
    }
    let beta = chart.beta();
    let mut lam = DMatrix::zeros(n, n);
    let mut xi = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let a = -0.5 * beta * (forces[i].trace_product(&ys[j])? + forces[j].trace_product(&ys[i])?);
            let b = -0.5 * beta * (forces[i].trace_product(&yj[j])? + forces[j].trace_product(&yj[i])?);
            lam[(i, j)] = a;
            lam[(j, i)] = a;
            xi[(i, j)] = b;
            xi[(j, i)] = b;
        }
    }
    Ok(MetricPair {
        fluctuation: lam,
        dissipation: xi,
    })
}

pub fn fluctuation_metric<M: MetricSource + ?Sized>(source: &M, lambda: &[f64]) -> Result<DMatrix<f64>> {
    Ok(source.metric_pair(lambda)?.fluctuation)
}

pub fn dissipation_metric<M: MetricSource + ?Sized>(source: &M, lambda: &[f64]) -> Result<DMatrix<f64>> {
    Ok(source.metric_pair(lambda)?.dissipation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    Fluctuation,
    Dissipation,
    Alpha(f64),
}

/// λ ↦ metric matrix of a given kind.
#[derive(Debug, Clone, Copy)]
pub struct MetricField<'a, M: MetricSource + ?Sized> {
    source: &'a M,
    kind: MetricKind,
}

impl<'a, M: MetricSource + ?Sized> MetricField<'a, M> {
    pub fn new(source: &'a M, kind: MetricKind) -> Result<Self> {
        if let MetricKind::Alpha(a) = kind {
            check_alpha(a)?;
        }
        Ok(Self { source, kind })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn evaluate(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.source.metric_pair(lambda)?;
        Ok(match self.kind {
            MetricKind::Fluctuation => p.fluctuation,
            MetricKind::Dissipation => p.dissipation,
            MetricKind::Alpha(a) => p.alpha(a),
        })
    }
}

/// g_α as a metric field.
pub fn alpha_metric<M: MetricSource + ?Sized>(source: &M, alpha: f64) -> Result<MetricField<'_, M>> {
    MetricField::new(source, MetricKind::Alpha(alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}
