//! Discrete quench chain at arbitrary system–bath coupling.
//!
//! The system Hamiltonian is switched suddenly through H⁽⁰⁾ … H⁽ᴺ⁾ with
//! H⁽ⁱ⁾ = H(i/N); after every switch the composite relaxes to the global
//! Gibbs state of H_SB⁽ⁱ⁾ = H⁽ⁱ⁾ ⊗ 1 + 1 ⊗ H_B + γ_c V. The work of step i is
//! the local quench observable H⁽ⁱ⁺¹⁾ − H⁽ⁱ⁾ in the reduced state
//! π̃⁽ⁱ⁾ = Tr_B π_SB⁽ⁱ⁾, and steps are independent.
//!
//! For large N, with Ḣ = dH/ds and the global power operator Ḣ ⊗ 1,
//!
//! * N·W_diss → (β/2) ∫₀¹ Tr[Ḣ 𝕁_π(Ḣ)] ds
//! * N·βσ²/2 → (β/2) ∫₀¹ Tr[Ḣ 𝕊_π(Ḣ)] ds
//!
//! so the gap βσ²/2 − W_diss approaches (β/2N) ∫₀¹ 𝓘 ds with 𝓘 the skew
//! information of the global Gibbs state.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::operator::{
    gibbs_state, log_partition_function, mean_images, partial_trace_second, relative_entropy, wyd_skew_information,
    DensityMatrix,
};
use crate::protocol::UnitFn;
use crate::quad::gauss_legendre_on;
use crate::slow::{Method, WorkStatistics};
use crate::{Density, Hermitian};

/// Largest composite (system ⊗ bath) dimension.
pub const QUENCH_DIMENSION_CAP: usize = 64;

const FD_STEP: f64 = 1e-5;
const CONTINUUM_NODES: usize = 48;

#[derive(Clone)]
pub struct QuenchSequence {
    steps: usize,
    system: UnitFn,
    system_derivative: Option<UnitFn>,
    bath: Hermitian,
    interaction: Hermitian,
    coupling: f64,
    beta: f64,
}

impl fmt::Debug for QuenchSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuenchSequence")
            .field("steps", &self.steps)
            .field("system_dim", &self.system_dim())
            .field("bath_dim", &self.bath.dim())
            .field("coupling", &self.coupling)
            .field("beta", &self.beta)
            .finish()
    }
}

impl QuenchSequence {
    /// Chain along a caller-supplied system path s ↦ H(s) on [0, 1], with
    /// an optional analytic dH/ds (central differences otherwise).
    pub fn from_schedule(
        system: UnitFn,
        system_derivative: Option<UnitFn>,
        bath: Hermitian,
        interaction: Hermitian,
        coupling: f64,
        beta: f64,
        steps: usize,
    ) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Domain(format!("quench chain needs N ≥ 2, got {steps}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("inverse temperature must be > 0, got {beta}")));
        }
        if !coupling.is_finite() {
            return Err(Error::Domain(format!("coupling must be finite, got {coupling}")));
        }
        let h0 = system(0.0);
        check_dims(h0.dim(), system(1.0).dim())?;
        let d = h0.dim() * bath.dim();
        if d > QUENCH_DIMENSION_CAP {
            return Err(Error::DimensionCap {
                dim: d,
                cap: QUENCH_DIMENSION_CAP,
            });
        }
        check_dims(d, interaction.dim())?;
        Ok(Self {
            steps,
            system,
            system_derivative,
            bath,
            interaction,
            coupling,
            beta,
        })
    }

    /// H(s) = H₀ + s(H₁ − H₀).
    pub fn linear(
        h0: Hermitian,
        h1: Hermitian,
        bath: Hermitian,
        interaction: Hermitian,
        coupling: f64,
        beta: f64,
        steps: usize,
    ) -> Result<Self> {
        check_dims(h0.dim(), h1.dim())?;
        let diff = &h1 - &h0;
        let d2 = diff.clone();
        Self::from_schedule(
            Arc::new(move |s| &h0 + &(&diff * s)),
            Some(Arc::new(move |_| d2.clone())),
            bath,
            interaction,
            coupling,
            beta,
            steps,
        )
    }

    /// Same path and bath with a different number of quenches.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Domain(format!("quench chain needs N ≥ 2, got {steps}")));
        }
        Ok(Self { steps, ..self.clone() })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn system_dim(&self) -> usize {
        (self.system)(0.0).dim()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath.dim()
    }

    pub fn system_at(&self, s: f64) -> Hermitian {
        (self.system)(s)
    }

    /// H⁽ⁱ⁾ = H(i/N).
    pub fn system_hamiltonian(&self, i: usize) -> Hermitian {
        self.system_at(i as f64 / self.steps as f64)
    }

    /// dH/ds, analytic if supplied.
    pub fn system_derivative(&self, s: f64) -> Hermitian {
        match &self.system_derivative {
            Some(d) => d(s),
            None => {
                let (a, b) = ((s - FD_STEP).max(0.0), (s + FD_STEP).min(1.0));
                (&self.system_at(b) - &self.system_at(a)) * (1.0 / (b - a))
            }
        }
    }

    fn lift(&self, a: &Hermitian) -> Hermitian {
        a.kron(&Hermitian::identity(self.bath.dim()))
    }

    pub fn global_hamiltonian(&self, s: f64) -> Hermitian {
        let hb = Hermitian::identity(self.system_dim()).kron(&self.bath);
        &(&self.lift(&self.system_at(s)) + &hb) + &(&self.interaction * self.coupling)
    }

    pub fn global_gibbs(&self, s: f64) -> Result<Density> {
        gibbs_state(&self.global_hamiltonian(s), self.beta)
    }

    /// π̃(s) = Tr_B π_SB(s).
    pub fn reduced_gibbs(&self, s: f64) -> Result<Density> {
        let g = self.global_gibbs(s)?;
        reduce(&g, self.system_dim(), self.bath_dim())
    }
}

fn reduce(g: &Density, ds: usize, db: usize) -> Result<Density> {
    let m = partial_trace_second(g.matrix(), ds, db)?;
    DensityMatrix::with_tolerance(m, 1e-10, 1e-10)
}

struct Stage {
    reduced: Density,
    log_z: f64,
}

fn stages(seq: &QuenchSequence) -> Result<Vec<Stage>> {
    (0..=seq.steps)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / seq.steps as f64;
            let h = seq.global_hamiltonian(s);
            let g = gibbs_state(&h, seq.beta)?;
            Ok(Stage {
                reduced: reduce(&g, seq.system_dim(), seq.bath_dim())?,
                log_z: log_partition_function(&h, seq.beta)?,
            })
        })
        .collect()
}

/// Work statistics of the chain; ΔF from global partition functions.
pub fn quench_statistics(seq: &QuenchSequence) -> Result<WorkStatistics> {
    let st = stages(seq)?;
    let mut mean = 0.0;
    let mut var = 0.0;
    for i in 0..seq.steps {
        let dh = &seq.system_hamiltonian(i + 1) - &seq.system_hamiltonian(i);
        let m = dh.expectation(&st[i].reduced)?;
        let sq = Hermitian::new(dh.matrix() * dh.matrix())?;
        mean += m;
        var += sq.expectation(&st[i].reduced)? - m * m;
    }
    let delta_f = -(st[seq.steps].log_z - st[0].log_z) / seq.beta;
    let w_diss = mean - delta_f;
    Ok(WorkStatistics {
        w_mean: mean,
        w_diss,
        sigma2: var,
        q_w: 0.5 * seq.beta * var - w_diss,
        delta_f,
        method: Method::Quench,
    })
}

/// β⁻¹ Σᵢ S(π_SB⁽ⁱ⁾ ‖ π_SB⁽ⁱ⁺¹⁾) from the spectral relative entropy.
pub fn relative_entropy_dissipation(seq: &QuenchSequence) -> Result<f64> {
    let states: Vec<Density> = (0..=seq.steps)
        .into_par_iter()
        .map(|i| seq.global_gibbs(i as f64 / seq.steps as f64))
        .collect::<Result<_>>()?;
    let total = states
        .windows(2)
        .map(|w| relative_entropy(&w[0], &w[1]))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>();
    Ok(total / seq.beta)
}

/// Continuum integrals over s ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumIntegrals {
    /// (β/2) ∫ Tr[Ḣ 𝕁_π(Ḣ)] ds, the limit of N·W_diss.
    pub dissipation: f64,
    /// (β/2) ∫ Var_π̃(Ḣ) ds, the limit of N·βσ²/2.
    pub half_beta_variance: f64,
    /// (β/2) ∫ 𝓘(π_SB, Ḣ ⊗ 1) ds, the limit of N·(βσ²/2 − W_diss).
    pub skew: f64,
    /// (β/2) ∫ 𝓘(π̃, Ḣ) ds with the reduced state, for comparison.
    pub skew_reduced: f64,
}

impl ContinuumIntegrals {
    pub fn compute(seq: &QuenchSequence) -> Result<Self> {
        let (nodes, weights) = gauss_legendre_on(0.0, 1.0, CONTINUUM_NODES);
        let vals: Vec<[f64; 4]> = nodes
            .par_iter()
            .map(|&s| {
                let g = seq.global_gibbs(s)?;
                let a = seq.system_derivative(s);
                let lifted = seq.lift(&a);
                let im = mean_images(&g, &lifted)?;
                let reduced = reduce(&g, seq.system_dim(), seq.bath_dim())?;
                Ok([
                    lifted.trace_product(&im.j)?,
                    lifted.trace_product(&im.s)?,
                    wyd_skew_information(&g, &lifted)?,
                    wyd_skew_information(&reduced, &a)?,
                ])
            })
            .collect::<Result<_>>()?;
        let mut acc = [0.0; 4];
        for (v, w) in vals.iter().zip(&weights) {
            for k in 0..4 {
                acc[k] += w * v[k];
            }
        }
        let hb = 0.5 * seq.beta;
        Ok(Self {
            dissipation: hb * acc[0],
            half_beta_variance: hb * acc[1],
            skew: hb * acc[2],
            skew_reduced: hb * acc[3],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchRow {
    pub n: usize,
    pub wdiss: f64,
    pub half_beta_var: f64,
    /// (β/2N) ∫ 𝓘 ds.
    pub q_w_pred: f64,
    /// N·W_diss / ((β/2)∫Tr[Ḣ𝕁Ḣ]) − 1.
    pub residual: f64,
    /// (βσ²/2 − W_diss) − q_w_pred.
    pub gap_residual: f64,
}

impl QuenchRow {
    pub fn gap(&self) -> f64 {
        self.half_beta_var - self.wdiss
    }
}

#[derive(Debug, Clone)]
pub struct QuenchReport {
    pub rows: Vec<QuenchRow>,
    pub continuum: ContinuumIntegrals,
}

impl QuenchReport {
    /// residual(N)/residual(2N) for every N whose double is also present.
    pub fn halving_ratios(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter_map(|r| {
                self.rows
                    .iter()
                    .find(|q| q.n == 2 * r.n)
                    .map(|q| (r.n, r.residual / q.residual))
            })
            .collect()
    }

    /// Least-squares c in gap_residual ≈ c/N².
    pub fn gap_coefficient(&self) -> f64 {
        let (num, den) = self.rows.iter().fold((0.0, 0.0), |(a, b), r| {
            let basis = 1.0 / (r.n as f64).powi(2);
            (a + basis * r.gap_residual, b + basis * basis)
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Fitted p in |gap_residual| ≈ c N^{−p} (log–log least squares).
    pub fn gap_exponent(&self) -> f64 {
        log_log_slope(self.rows.iter().map(|r| (r.n as f64, r.gap_residual.abs())))
    }

    /// Fitted p in |residual| ≈ c N^{−p}.
    pub fn residual_exponent(&self) -> f64 {
        log_log_slope(self.rows.iter().map(|r| (r.n as f64, r.residual.abs())))
    }
}

/// −slope of ln y against ln x.
pub(crate) fn log_log_slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// Runs the chain at every N in `ns` and compares with the continuum
/// integrals.
pub fn quench_continuum_check(seq: &QuenchSequence, ns: &[usize]) -> Result<QuenchReport> {
    if ns.is_empty() {
        return Err(Error::Domain("continuum check needs at least one N".into()));
    }
    let continuum = ContinuumIntegrals::compute(seq)?;
    let rows: Vec<QuenchRow> = ns
        .par_iter()
        .map(|&n| {
            let stats = quench_statistics(&seq.with_steps(n)?)?;
            let nf = n as f64;
            let half_beta_var = 0.5 * seq.beta * stats.sigma2;
            let q_w_pred = continuum.skew / nf;
            Ok(QuenchRow {
                n,
                wdiss: stats.w_diss,
                half_beta_var,
                q_w_pred,
                residual: nf * stats.w_diss / continuum.dissipation - 1.0,
                gap_residual: (half_beta_var - stats.w_diss) - q_w_pred,
            })
        })
        .collect::<Result<_>>()?;
    Ok(QuenchReport { rows, continuum })
}
