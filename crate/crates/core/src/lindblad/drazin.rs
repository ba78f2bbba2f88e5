use super::{Lindbladian, Repr};
use crate::error::{check_dims, Error, Result};
use crate::{CMatrix, Hermitian, Super, C64};

#[derive(Debug, Clone)]
enum Kind {
    Thermalizer { rate: f64, pi: CMatrix },
    Dense(Super),
}

/// ℒ⁺ with ℒℒ⁺ = ℒ⁺ℒ = 1 − 𝒫, ℒ⁺[π] = 0 and Tr ℒ⁺[A] = 0, where
/// 𝒫(A) = π Tr A.
#[derive(Debug, Clone)]
pub struct DrazinInverse {
    dim: usize,
    source: String,
    kind: Kind,
}

impl DrazinInverse {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Label of the generator this was built from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        check_dims(self.dim, a.nrows())?;
        match &self.kind {
            Kind::Dense(s) => s.apply(a),
            Kind::Thermalizer { rate, pi } => Ok((pi * a.trace() - a) * C64::new(1.0 / rate, 0.0)),
        }
    }

    /// ℒ⁺ maps Hermitian operators to Hermitian operators.
    pub fn apply_hermitian(&self, a: &Hermitian) -> Result<Hermitian> {
        Ok(Hermitian::symmetrised(self.apply(a.matrix())?))
    }

    pub fn supermatrix(&self) -> Super {
        match &self.kind {
            Kind::Dense(s) => s.clone(),
            Kind::Thermalizer { rate, pi } => {
                let d = self.dim;
                Super::outer(pi, &CMatrix::identity(d, d))
                    .sub(&Super::identity(d))
                    .expect("same dimension")
                    .scale(1.0 / rate)
            }
        }
    }
}

/// Closed form for the perfect thermalizer, deflated solve otherwise.
pub fn drazin_inverse(l: &Lindbladian) -> Result<DrazinInverse> {
    match &l.repr {
        Repr::Thermalizer { rate } => Ok(DrazinInverse {
            dim: l.dim(),
            source: l.label().to_string(),
            kind: Kind::Thermalizer {
                rate: *rate,
                pi: l.stationary_state().matrix().clone(),
            },
        }),
        Repr::Dense(_) => drazin_inverse_deflated(l),
    }
}

/// Solves (ℒ − 𝒫) X = 1 − 𝒫 and returns X(1 − 𝒫), after checking that the
/// zero eigenvalue of ℒ is simple.
pub fn drazin_inverse_deflated(l: &Lindbladian) -> Result<DrazinInverse> {
    let d = l.dim();
    let n = d * d;
    let sup = l.supermatrix();
    let eig = l.spectrum()?;
    let scale = eig.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let mut by_modulus = eig.clone();
    by_modulus.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal));
    if by_modulus.len() > 1 && by_modulus[1].norm() < 1e-9 * scale {
        return Err(Error::Singular(format!(
            "zero eigenvalue of {} is not simple; second near-null eigenvalue {:.3e}{:+.3e}i",
            l.label(),
            by_modulus[1].re,
            by_modulus[1].im
        )));
    }
    if let Some(z) = eig.iter().skip(1).find(|z| z.re > 1e-9 * scale) {
        return Err(Error::Singular(format!(
            "{} has an eigenvalue with positive real part {:.3e}",
            l.label(),
            z.re
        )));
    }
    let p = Super::outer(l.stationary_state().matrix(), &CMatrix::identity(d, d));
    let q = Super::identity(d).sub(&p)?;
    let shifted = sup.sub(&p)?;
    let lu = shifted.matrix().clone().lu();
    let x = lu
        .solve(q.matrix())
        .ok_or_else(|| Error::Singular(format!("deflated generator of {} is singular", l.label())))?;
    let result = x * q.matrix();
    if result.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Singular(format!("deflated solve for {} produced non-finite entries", l.label())));
    }
    debug_assert_eq!(result.nrows(), n);
    Ok(DrazinInverse {
        dim: d,
        source: l.label().to_string(),
        kind: Kind::Dense(Super::from_matrix(d, result)?),
    })
}
