use std::fmt;
use std::sync::Arc;

use nalgebra::ComplexField;

use super::Lindbladian;
use crate::error::{check_dims, Error, Result};
use crate::operator::gibbs_state;
use crate::{CMatrix, Hermitian, Super, C64};

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {x}")))
    }
}

/// ℒ[ρ] = Γ(π Tr ρ − ρ) with π the Gibbs state of `h`.
pub fn perfect_thermalizer(h: &Hermitian, beta: f64, rate: f64) -> Result<Lindbladian> {
    check_positive("thermalization rate", rate)?;
    let pi = gibbs_state(h, beta)?;
    Ok(Lindbladian::thermalizer(h.clone(), pi, beta, rate))
}

/// −i[H, ·] as a supermatrix.
pub fn unitary_supermatrix(h: &Hermitian) -> Super {
    let m = h.matrix();
    let comm = Super::left(m).sub(&Super::right(m)).expect("same dimension");
    Super::from_matrix(h.dim(), comm.into_matrix() * C64::new(0.0, -1.0)).expect("square")
}

// c ρ c† − ½{c†c, ρ}
fn dissipator(c: &CMatrix, rate: f64) -> Super {
    let cd = c.adjoint();
    let cdc = &cd * c;
    let jump = Super::sandwich(c, &cd);
    let anti = Super::left(&cdc).add(&Super::right(&cdc)).expect("same dimension");
    jump.sub(&anti.scale(0.5)).expect("same dimension").scale(rate)
}

/// Rate matrix γ_{αβ}(ω) of a bath coupled through several channels.
pub trait RateFunction: Send + Sync {
    /// Hermitian positive-semidefinite `channels × channels` matrix.
    fn rates(&self, omega: f64, channels: usize) -> CMatrix;
}

impl<F> RateFunction for F
where
    F: Fn(f64, usize) -> CMatrix + Send + Sync,
{
    fn rates(&self, omega: f64, channels: usize) -> CMatrix {
        self(omega, channels)
    }
}

/// Independent flat-spectrum bosonic baths, one per channel:
/// γ(ω) = g(1 + n(ω)) for ω > 0 and g·n(|ω|) for ω < 0 with
/// n(ω) = 1/(e^{βω} − 1). The ω = 0 (pure dephasing) rate is a free choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatBath {
    pub gamma: f64,
    pub beta: f64,
    pub zero_frequency_rate: f64,
}

impl FlatBath {
    pub fn new(gamma: f64, beta: f64) -> Self {
        Self {
            gamma,
            beta,
            zero_frequency_rate: 0.0,
        }
    }

    pub fn scalar_rate(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return self.zero_frequency_rate;
        }
        let n = 1.0 / (self.beta * omega.abs()).exp_m1();
        if omega > 0.0 {
            self.gamma * (1.0 + n)
        } else {
            self.gamma * n
        }
    }
}

impl RateFunction for FlatBath {
    fn rates(&self, omega: f64, channels: usize) -> CMatrix {
        CMatrix::identity(channels, channels) * C64::new(self.scalar_rate(omega), 0.0)
    }
}

const BOHR_GROUPING: f64 = 1e-10;

/// Bohr frequencies ω = ε_j − ε_i grouped within 1e-10, with the member
/// index pairs (i, j) of each group.
fn bohr_groups(energies: &[f64]) -> Vec<(f64, Vec<(usize, usize)>)> {
    let d = energies.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            pairs.push((energies[j] - energies[i], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for (w, i, j) in pairs {
        match groups.last_mut() {
            Some((_, members)) if w - start <= BOHR_GROUPING => members.push((i, j)),
            _ => {
                start = w;
                groups.push((w, vec![(i, j)]));
            }
        }
    }
    // representative frequency: group mean, with ±ω groups exactly antisymmetric
    for (w, members) in groups.iter_mut() {
        let mean = members.iter().map(|&(i, j)| energies[j] - energies[i]).sum::<f64>() / members.len() as f64;
        *w = if members.iter().all(|&(i, j)| i == j) || mean.abs() <= BOHR_GROUPING {
            0.0
        } else {
            mean
        };
    }
    groups
}

fn max_modulus(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.modulus()))
}

/// Davies-type generator 𝒰 + 𝒟 over the Bohr frequencies of `h`.
///
/// Eigenoperators A_α(ω) = Σ_{ε_j−ε_i=ω} |ε_i⟩⟨ε_i|A_α|ε_j⟩⟨ε_j| and
/// 𝒟 = Σ_ω Σ_{αβ} γ_{αβ}(ω)(A_β ρ A_α† − ½{A_α† A_β, ρ}). The rate function
/// must satisfy KMS, γ_{αβ}(−ω) = e^{−βω} γ_{βα}(ω), on those frequencies.
pub fn davies_generator(
    h: &Hermitian,
    couplings: &[Hermitian],
    rates: &dyn RateFunction,
    beta: f64,
) -> Result<Lindbladian> {
    let d = h.dim();
    if couplings.is_empty() {
        return Err(Error::Domain("Davies generator needs at least one coupling".into()));
    }
    for c in couplings {
        check_dims(d, c.dim())?;
    }
    let pi = gibbs_state(h, beta)?;
    let spec = h.eigen();
    let energies: Vec<f64> = spec.values().iter().copied().collect();
    let u = spec.vectors();
    let groups = bohr_groups(&energies);
    let k = couplings.len();

    let mut rate_table = Vec::with_capacity(groups.len());
    for (w, _) in &groups {
        let g = rates.rates(*w, k);
        if g.nrows() != k || g.ncols() != k {
            return Err(Error::Contract(format!("rate matrix must be {k}×{k}")));
        }
        let herm = max_modulus(&(&g - g.adjoint()));
        let scale = max_modulus(&g).max(f64::MIN_POSITIVE);
        if herm > 1e-12 * scale {
            return Err(Error::Contract(format!("rate matrix at ω = {w} is not Hermitian")));
        }
        let min_eig = g.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * scale {
            return Err(Error::Contract(format!("rate matrix at ω = {w} is not positive semidefinite")));
        }
        rate_table.push(g);
    }
    for (a, (w, _)) in groups.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        let Some(b) = groups.iter().position(|(v, _)| (v + w).abs() <= 10.0 * BOHR_GROUPING) else {
            return Err(Error::Contract(format!("no negative partner for Bohr frequency {w}")));
        };
        let expected = rate_table[a].transpose() * C64::new((-beta * w).exp(), 0.0);
        let dev = max_modulus(&(&rate_table[b] - &expected));
        let scale = max_modulus(&rate_table[a]).max(max_modulus(&rate_table[b])).max(f64::MIN_POSITIVE);
        if dev > 1e-8 * scale {
            return Err(Error::Contract(format!(
                "rate function violates KMS at ω = {w} (deviation {dev:.3e})"
            )));
        }
    }

    let tilde: Vec<CMatrix> = couplings.iter().map(|c| u.adjoint() * c.matrix() * u).collect();
    let mut total = unitary_supermatrix(h);
    for ((_, members), g) in groups.iter().zip(&rate_table) {
        let ops: Vec<CMatrix> = tilde
            .iter()
            .map(|t| {
                let mut a = CMatrix::zeros(d, d);
                for &(i, j) in members {
                    a[(i, j)] = t[(i, j)];
                }
                u * a * u.adjoint()
            })
            .collect();
        for (alpha, a_alpha) in ops.iter().enumerate() {
            let a_alpha_dag = a_alpha.adjoint();
            for (beta_idx, a_beta) in ops.iter().enumerate() {
                let gab = g[(alpha, beta_idx)];
                if gab.modulus() == 0.0 {
                    continue;
                }
                let prod = &a_alpha_dag * a_beta;
                let term = Super::sandwich(a_beta, &a_alpha_dag)
                    .sub(&Super::left(&prod).add(&Super::right(&prod))?.scale(0.5))?;
                let scaled = Super::from_matrix(d, term.into_matrix() * gab)?;
                total = total.add(&scaled)?;
            }
        }
    }
    Lindbladian::from_supermatrix(h.clone(), pi, beta, total, "Davies generator")
}

/// Qubit coupled to a flat bosonic bath, for H = h₀ + r n̂·σ⃗ (splitting 2r):
/// rates γ(P+1) on σ₋ and γP on σ₊ in the energy frame, P = 1/(e^{2βr} − 1),
/// plus the unitary part −i[H, ·].
pub fn qubit_boson_for(h: &Hermitian, beta: f64, gamma: f64) -> Result<Lindbladian> {
    check_dims(2, h.dim())?;
    check_positive("qubit-boson rate", gamma)?;
    let m = h.matrix();
    let hx = m[(1, 0)].re;
    let hy = m[(1, 0)].im;
    let hz = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    check_positive("qubit field magnitude r", r)?;
    let theta = (hz / r).clamp(-1.0, 1.0).acos();
    let phi = hy.atan2(hx);
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let ph = C64::new(phi.cos(), phi.sin());
    // eigenvectors of n̂·σ⃗: |e⟩ for +1, |g⟩ for −1
    let e = [C64::new(c, 0.0), ph * s];
    let g = [-ph.conj() * s, C64::new(c, 0.0)];
    let lower = CMatrix::from_fn(2, 2, |i, j| g[i] * e[j].conj());
    let raise = lower.adjoint();
    let p = 1.0 / (2.0 * beta * r).exp_m1();
    let pi = gibbs_state(h, beta)?;
    let total = unitary_supermatrix(h)
        .add(&dissipator(&lower, gamma * (p + 1.0)))?
        .add(&dissipator(&raise, gamma * p))?;
    Lindbladian::from_supermatrix(h.clone(), pi, beta, total, "qubit-boson generator")
}

/// [`qubit_boson_for`] with H = r(cos φ sin θ σx + sin φ sin θ σy + cos θ σz).
pub fn qubit_boson_generator(r: f64, theta: f64, phi: f64, beta: f64, gamma: f64) -> Result<Lindbladian> {
    check_positive("qubit field magnitude r", r)?;
    let h = crate::pauli::bloch(
        r * phi.cos() * theta.sin(),
        r * phi.sin() * theta.sin(),
        r * theta.cos(),
    );
    qubit_boson_for(&h, beta, gamma)
}

/// Recipe turning a Hamiltonian into a generator; used by driven families.
#[derive(Clone)]
pub enum GeneratorKind {
    Thermalizer { rate: f64 },
    QubitBoson { gamma: f64 },
    Davies {
        couplings: Vec<Hermitian>,
        bath: Arc<dyn RateFunction>,
    },
}

impl fmt::Debug for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Thermalizer { rate } => write!(f, "Thermalizer {{ rate: {rate} }}"),
            GeneratorKind::QubitBoson { gamma } => write!(f, "QubitBoson {{ gamma: {gamma} }}"),
            GeneratorKind::Davies { couplings, .. } => {
                write!(f, "Davies {{ couplings: {} }}", couplings.len())
            }
        }
    }
}

impl GeneratorKind {
    pub fn build(&self, h: &Hermitian, beta: f64) -> Result<Lindbladian> {
        match self {
            GeneratorKind::Thermalizer { rate } => perfect_thermalizer(h, beta, *rate),
            GeneratorKind::QubitBoson { gamma } => qubit_boson_for(h, beta, *gamma),
            GeneratorKind::Davies { couplings, bath } => davies_generator(h, couplings, bath.as_ref(), beta),
        }
    }
}
