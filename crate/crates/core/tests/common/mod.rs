//! Random draws and independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use qfdr_core::lindblad::{davies_generator, perfect_thermalizer, qubit_boson_generator, FlatBath, Lindbladian};
use qfdr_core::{CMatrix, Density, Hermitian, Super, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// GUE-like Hermitian matrix with entries of order `scale`.
pub fn random_hermitian(rng: &mut impl Rng, d: usize, scale: f64) -> Hermitian {
    let m = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let h = (&m + m.adjoint()) * C64::new(0.5 * scale, 0.0);
    Hermitian::new(h).expect("symmetrised")
}

/// Full-rank state G G† / Tr.
pub fn random_density(rng: &mut impl Rng, d: usize) -> Density {
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Density::new(m).expect("positive by construction")
}

pub fn random_operator(rng: &mut impl Rng, d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Which constructor produced a random generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constructor {
    Thermalizer,
    Davies,
    QubitBoson,
}

/// Draw `index` of a cycle through the three constructors; qubit–boson
/// draws are always d = 2, the others cycle d ∈ {2, 3, 4}.
pub fn random_generator(rng: &mut impl Rng, index: usize) -> (Constructor, Lindbladian) {
    let beta = rng.random_range(0.3..2.0);
    match index % 3 {
        0 => {
            let d = 2 + (index / 3) % 3;
            let h = random_hermitian(rng, d, 1.0);
            let rate = rng.random_range(0.3..3.0);
            (Constructor::Thermalizer, perfect_thermalizer(&h, beta, rate).unwrap())
        }
        1 => {
            let d = 2 + (index / 3) % 3;
            let h = random_hermitian(rng, d, 1.0);
            let n_couplings = 1 + (index / 9) % 2;
            let couplings: Vec<Hermitian> = (0..n_couplings).map(|_| random_hermitian(rng, d, 1.0)).collect();
            let mut bath = FlatBath::new(rng.random_range(0.2..1.5), beta);
            bath.zero_frequency_rate = rng.random_range(0.0..0.5);
            (Constructor::Davies, davies_generator(&h, &couplings, &bath, beta).unwrap())
        }
        _ => {
            let r = rng.random_range(0.2..2.0);
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let gamma = rng.random_range(0.3..2.0);
            (
                Constructor::QubitBoson,
                qubit_boson_generator(r, theta, phi, beta, gamma).unwrap(),
            )
        }
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// 𝒫(·) = π Tr(·) as a column-stacked supermatrix.
pub fn stationary_projector(l: &Lindbladian) -> CMatrix {
    let d = l.dim();
    let pi = l.stationary_state().matrix();
    let vpi = DMatrix::from_column_slice(d * d, 1, pi.as_slice());
    let id = CMatrix::identity(d, d);
    let vid = DMatrix::from_column_slice(d * d, 1, id.as_slice());
    vpi * vid.adjoint()
}

/// −∫₀^{ν_max} e^{νℒ}(1 − 𝒫) dν with ν_max = 40/|Re λ_slowest|.
///
/// Each panel integral ∫₀^h e^{νℒ} dν is the upper-right block of
/// exp([[ℒ, 1], [0, 0]] h); panels are accumulated by repeated doubling.
pub fn drazin_integral_oracle(l: &Lindbladian) -> CMatrix {
    let big = l.supermatrix().into_matrix();
    let n = big.nrows();
    let slowest = l
        .spectrum()
        .unwrap()
        .iter()
        .filter(|z| z.norm() > 1e-9)
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    let nu_max = 40.0 / slowest;
    let doublings = 12;
    let h = nu_max / f64::from(1u32 << doublings);
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&big * C64::new(h, 0.0)));
    aug.view_mut((0, n), (n, n)).copy_from(&(CMatrix::identity(n, n) * C64::new(h, 0.0)));
    let e = aug.exp();
    let q = CMatrix::identity(n, n) - stationary_projector(l);
    let mut step = e.view((0, 0), (n, n)) * &q;
    let mut acc = e.view((0, n), (n, n)) * &q;
    for _ in 0..doublings {
        acc = &acc + &step * &acc;
        step = &step * &step;
    }
    // truncation tail e^{ν_max ℒ}(1 − 𝒫) must be negligible
    assert!(max_abs(&step) < 1e-12, "integral oracle tail {:.3e}", max_abs(&step));
    -acc
}

/// Superoperator applied through its column-stacked matrix.
pub fn apply_super(s: &Super, a: &CMatrix) -> CMatrix {
    s.apply(a).unwrap()
}
