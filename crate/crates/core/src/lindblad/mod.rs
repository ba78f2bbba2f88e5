//! Lindblad generators with instantaneous Gibbs fixed points, their Drazin
//! inverses and time-ordered propagators.
//!
//! A [`Lindbladian`] is either the closed-form perfect thermalizer
//! ℒ[ρ] = Γ(π Tr ρ − ρ), which never materialises a d²×d² matrix, or a dense
//! supermatrix in the column-major convention of [`crate::operator`].

mod drazin;
mod generators;
mod propagator;

pub use drazin::{drazin_inverse, drazin_inverse_deflated, DrazinInverse};
pub use generators::{
    davies_generator, perfect_thermalizer, qubit_boson_for, qubit_boson_generator,
    unitary_supermatrix, FlatBath, GeneratorKind, RateFunction,
};
pub use propagator::{propagator, propagator_fixed, ConstantFamily, GeneratorFamily};
pub(crate) use propagator::refined_pair;

use nalgebra::{DMatrix, Schur};

use crate::error::{check_dims, Error, Result};
use crate::operator::vectorize;
use crate::{CMatrix, Density, Hermitian, Super, C64};

#[derive(Debug, Clone)]
enum Repr {
    Thermalizer { rate: f64 },
    Dense(Super),
}

/// Time-local generator with its Hamiltonian and Gibbs stationary state.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    hamiltonian: Hermitian,
    stationary: Density,
    beta: f64,
    label: String,
    repr: Repr,
}

impl Lindbladian {
    /// Wraps a dense supermatrix and checks that it annihilates `stationary`
    /// to `1e-9` relative to its norm.
    pub fn from_supermatrix(
        hamiltonian: Hermitian,
        stationary: Density,
        beta: f64,
        supermatrix: Super,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_dims(hamiltonian.dim(), supermatrix.dim())?;
        check_dims(hamiltonian.dim(), stationary.dim())?;
        let residual = (supermatrix.matrix() * vectorize(stationary.matrix())).norm();
        let scale = supermatrix.norm().max(1.0);
        if residual > 1e-9 * scale {
            return Err(Error::Contract(format!(
                "generator does not annihilate its stationary state (residual {residual:.3e})"
            )));
        }
        Ok(Self {
            hamiltonian,
            stationary,
            beta,
            label: label.into(),
            repr: Repr::Dense(supermatrix),
        })
    }

    pub(crate) fn thermalizer(hamiltonian: Hermitian, stationary: Density, beta: f64, rate: f64) -> Self {
        Self {
            hamiltonian,
            stationary,
            beta,
            label: format!("perfect thermalizer (rate {rate})"),
            repr: Repr::Thermalizer { rate },
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn stationary_state(&self) -> &Density {
        &self.stationary
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Γ for the perfect thermalizer, `None` for dense generators.
    pub fn thermalizer_rate(&self) -> Option<f64> {
        match self.repr {
            Repr::Thermalizer { rate } => Some(rate),
            Repr::Dense(_) => None,
        }
    }

    /// Dense d²×d² matrix (built on demand for the thermalizer).
    pub fn supermatrix(&self) -> Super {
        match &self.repr {
            Repr::Dense(s) => s.clone(),
            Repr::Thermalizer { rate } => {
                let d = self.dim();
                let p = Super::outer(self.stationary.matrix(), &CMatrix::identity(d, d));
                p.sub(&Super::identity(d)).expect("same dimension").scale(*rate)
            }
        }
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_dims(self.dim(), x.nrows())?;
        match &self.repr {
            Repr::Dense(s) => s.apply(x),
            Repr::Thermalizer { rate } => {
                let tr = x.trace();
                let out = self.stationary.matrix() * tr - x;
                Ok(out * C64::new(*rate, 0.0))
            }
        }
    }

    /// Eigenvalues sorted by decreasing real part.
    ///
    /// Computed from the real matrix of ℒ in an orthonormal basis of
    /// Hermitian operators, where nalgebra's real Schur form applies.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        if let Repr::Thermalizer { rate } = self.repr {
            let n = self.dim() * self.dim();
            let mut v = vec![C64::new(0.0, 0.0)];
            v.extend(std::iter::repeat(C64::new(-rate, 0.0)).take(n - 1));
            return Ok(v);
        }
        superoperator_spectrum(&self.supermatrix())
    }
}

fn hermitian_basis(d: usize) -> CMatrix {
    let n = d * d;
    let mut b = CMatrix::zeros(n, n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut col = 0;
    let idx = |i: usize, j: usize| i + d * j;
    for k in 0..d {
        b[(idx(k, k), col)] = C64::new(1.0, 0.0);
        col += 1;
    }
    for k in 0..d {
        for l in (k + 1)..d {
            b[(idx(k, l), col)] = C64::new(r, 0.0);
            b[(idx(l, k), col)] = C64::new(r, 0.0);
            col += 1;
            b[(idx(k, l), col)] = C64::new(0.0, r);
            b[(idx(l, k), col)] = C64::new(0.0, -r);
            col += 1;
        }
    }
    b
}

/// Eigenvalues of a Hermiticity-preserving superoperator, sorted by
/// decreasing real part.
pub fn superoperator_spectrum(s: &Super) -> Result<Vec<C64>> {
    let b = hermitian_basis(s.dim());
    let real_rep = b.adjoint() * s.matrix() * &b;
    let re: DMatrix<f64> = real_rep.map(|z| z.re);
    let schur = Schur::try_new(re, 1e-15, 100_000)
        .ok_or_else(|| Error::Convergence("Schur iteration for generator spectrum".into()))?;
    let mut eig: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(eig)
}
