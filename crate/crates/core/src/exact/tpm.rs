use nalgebra::ComplexField;
use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::operator::{gibbs_state, log_partition_function};
use crate::protocol::ProtocolPath;
use crate::{CMatrix, Density, Hermitian, C64};

/// Largest composite dimension accepted by the unitary oracles.
pub const TPM_DIMENSION_CAP: usize = 64;

const UNITARY_DEFECT: f64 = 1e-12;
const MOMENT_DRIFT: f64 = 1e-9;
const MAX_STEPS: usize = 1 << 18;
const BINNING: f64 = 1e-10;

fn check_cap(d: usize) -> Result<()> {
    if d > TPM_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim: d,
            cap: TPM_DIMENSION_CAP,
        });
    }
    Ok(())
}

/// Fourth-order Magnus step for each of `steps` equal intervals:
/// exp(−iK) with K = Δt(H₁ + H₂)/2 − i(√3/12)Δt²[H₂, H₁] at the two
/// Gauss points. K is Hermitian, so each factor is built from an
/// eigendecomposition and is unitary to machine precision.
pub fn unitary_step_propagators(path: &ProtocolPath, steps: usize) -> Result<Vec<CMatrix>> {
    check_cap(path.dim())?;
    if steps == 0 {
        return Err(Error::Domain("unitary evolution needs at least one step".into()));
    }
    let dt = path.tau() / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    Ok((0..steps)
        .into_par_iter()
        .map(|k| {
            let t0 = k as f64 * dt;
            let h1 = path.hamiltonian_at(t0 + (0.5 - offset) * dt);
            let h2 = path.hamiltonian_at(t0 + (0.5 + offset) * dt);
            let (a, b) = (h1.matrix(), h2.matrix());
            let comm = b * a - a * b;
            let k_mat = (a + b) * C64::new(0.5 * dt, 0.0) + comm * C64::new(0.0, -3f64.sqrt() / 12.0 * dt * dt);
            let spec = Hermitian::symmetrised(k_mat).eigen();
            let phases = CMatrix::from_diagonal(&spec.values().map(|e| C64::new(0.0, -e).exp()));
            spec.vectors() * phases * spec.vectors().adjoint()
        })
        .collect())
}

// Balanced pairwise product U_{n−1}⋯U_0: round-off grows with the tree
// depth rather than the step count.
fn ordered_product(steps: &[CMatrix], d: usize) -> CMatrix {
    let mut level: Vec<CMatrix> = steps.to_vec();
    if level.is_empty() {
        return CMatrix::identity(d, d);
    }
    while level.len() > 1 {
        level = level
            .par_chunks(2)
            .map(|pair| match pair {
                [early, late] => late * early,
                [single] => single.clone(),
                _ => unreachable!("chunks of two"),
            })
            .collect();
    }
    level.pop().expect("non-empty")
}

fn unitary_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    (u.adjoint() * u - CMatrix::identity(d, d))
        .iter()
        .fold(0.0, |m, z| m.max(z.modulus()))
}

// (Tr[ΔH ρ₀], Tr[ΔH² ρ₀]) with ΔH = U†H_τU − H₀
fn heisenberg_moments(u: &CMatrix, path: &ProtocolPath, rho0: &Density) -> Result<(f64, f64)> {
    let heis = Hermitian::symmetrised(u.adjoint() * path.end().matrix() * u);
    let delta = &heis - path.start();
    let sq = Hermitian::symmetrised(delta.matrix() * delta.matrix());
    Ok((delta.expectation(rho0)?, sq.expectation(rho0)?))
}

/// Converged Trotterised U(τ, 0).
#[derive(Debug, Clone)]
pub struct UnitaryEvolution {
    pub unitary: CMatrix,
    pub steps: usize,
    pub unitary_defect: f64,
}

impl UnitaryEvolution {
    /// Doubles `steps` until ‖U†U − 1‖ < 1e-12 and the Heisenberg moments
    /// for `rho0` drift by less than 1e-9 between successive doublings.
    pub fn converged(path: &ProtocolPath, rho0: &Density, steps: usize) -> Result<Self> {
        check_dims(path.dim(), rho0.dim())?;
        let d = path.dim();
        let mut n = steps.max(1);
        let mut u = ordered_product(&unitary_step_propagators(path, n)?, d);
        let mut moments = heisenberg_moments(&u, path, rho0)?;
        loop {
            if 2 * n > MAX_STEPS {
                return Err(Error::Convergence(format!(
                    "unitary evolution moments not stable at {n} steps"
                )));
            }
            let next_u = ordered_product(&unitary_step_propagators(path, 2 * n)?, d);
            let next = heisenberg_moments(&next_u, path, rho0)?;
            n *= 2;
            let drift = (next.0 - moments.0)
                .abs()
                .max((next.1 - moments.1).abs() / next.1.abs().max(1.0));
            u = next_u;
            moments = next;
            let defect = unitary_defect(&u);
            if drift < MOMENT_DRIFT && defect < UNITARY_DEFECT {
                return Ok(Self {
                    unitary: u,
                    steps: n,
                    unitary_defect: defect,
                });
            }
        }
    }
}

/// Two-point-measurement work distribution.
#[derive(Debug, Clone)]
pub struct TpmDistribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
    steps: usize,
}

impl TpmDistribution {
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Trotter steps used for U(τ, 0).
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Bins with probability above `threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<(f64, f64)> {
        self.support
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, &p)| p > threshold)
            .map(|(&w, &p)| (w, p))
            .collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| p * w.powi(k))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// ⟨e^{−βw}⟩.
    pub fn exponential_average(&self, beta: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| p * (-beta * w).exp())
            .sum()
    }
}

/// P(w) = Σ_{n,m} p_n |⟨ε_m(τ)|U|ε_n(0)⟩|² δ(w − ε_m(τ) + ε_n(0)) for a
/// global Gibbs initial state, with work values binned within 1e-10.
pub fn tpm_distribution_global(path: &ProtocolPath, steps: usize) -> Result<TpmDistribution> {
    check_cap(path.dim())?;
    let beta = path.beta();
    let rho0 = gibbs_state(path.start(), beta)?;
    let evo = UnitaryEvolution::converged(path, &rho0, steps)?;
    let s0 = path.start().eigen();
    let s1 = path.end().eigen();
    let lz0 = log_partition_function(path.start(), beta)?;
    let amp = s1.vectors().adjoint() * &evo.unitary * s0.vectors();
    let d = path.dim();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(d * d);
    for n in 0..d {
        let e_n = s0.values()[n];
        let p_n = (-beta * e_n - lz0).exp();
        for m in 0..d {
            pairs.push((s1.values()[m] - e_n, p_n * amp[(m, n)].norm_sqr()));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut support: Vec<f64> = Vec::new();
    let mut probabilities: Vec<f64> = Vec::new();
    let mut members: Vec<usize> = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for (w, p) in pairs {
        if w - start <= BINNING && !support.is_empty() {
            let k = support.len() - 1;
            support[k] += w;
            members[k] += 1;
            probabilities[k] += p;
        } else {
            start = w;
            support.push(w);
            members.push(1);
            probabilities.push(p);
        }
    }
    for (w, c) in support.iter_mut().zip(&members) {
        *w /= *c as f64;
    }
    Ok(TpmDistribution {
        support,
        probabilities,
        steps: evo.steps,
    })
}

/// (Tr[(U†H_τU − H₀)ρ₀], Tr[(U†H_τU − H₀)²ρ₀]); ρ₀ defaults to the Gibbs
/// state of H(0).
pub fn weak_measurement_moments(path: &ProtocolPath, rho0: Option<&Density>, steps: usize) -> Result<(f64, f64)> {
    check_cap(path.dim())?;
    let thermal;
    let rho0 = match rho0 {
        Some(r) => r,
        None => {
            thermal = gibbs_state(path.start(), path.beta())?;
            &thermal
        }
    };
    let evo = UnitaryEvolution::converged(path, rho0, steps)?;
    heisenberg_moments(&evo.unitary, path, rho0)
}
