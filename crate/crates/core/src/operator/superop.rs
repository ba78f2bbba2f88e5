//! Column-major vectorisation: vec(AXB) = (Bᵀ ⊗ A) vec(X).

use std::ops::Mul;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use super::Scalar;
use crate::error::{check_dims, Error, Result};

type Cx<T> = Complex<T>;

pub fn vectorize<T: Scalar>(a: &DMatrix<Cx<T>>) -> DVector<Cx<T>> {
    DVector::from_column_slice(a.as_slice())
}

pub fn devectorize<T: Scalar>(v: &DVector<Cx<T>>, d: usize) -> Result<DMatrix<Cx<T>>> {
    check_dims(d * d, v.len())?;
    Ok(DMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Linear map on d×d operators stored as a d²×d² matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix<T: Scalar> {
    dim: usize,
    m: DMatrix<Cx<T>>,
}

impl<T: Scalar> SuperMatrix<T> {
    pub fn from_matrix(dim: usize, m: DMatrix<Cx<T>>) -> Result<Self> {
        check_dims(dim * dim, m.nrows())?;
        check_dims(dim * dim, m.ncols())?;
        Ok(Self { dim, m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            m: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            dim,
            m: DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero())),
        }
    }

    /// X ↦ A X.
    pub fn left(a: &DMatrix<Cx<T>>) -> Self {
        let d = a.nrows();
        Self {
            dim: d,
            m: DMatrix::<Cx<T>>::identity(d, d).kronecker(a),
        }
    }

    /// X ↦ X B.
    pub fn right(b: &DMatrix<Cx<T>>) -> Self {
        let d = b.nrows();
        Self {
            dim: d,
            m: b.transpose().kronecker(&DMatrix::<Cx<T>>::identity(d, d)),
        }
    }

    /// X ↦ A X B.
    pub fn sandwich(a: &DMatrix<Cx<T>>, b: &DMatrix<Cx<T>>) -> Self {
        Self {
            dim: a.nrows(),
            m: b.transpose().kronecker(a),
        }
    }

    /// X ↦ A Tr[B† X], i.e. vec(A) vec(B)†.
    pub fn outer(a: &DMatrix<Cx<T>>, b: &DMatrix<Cx<T>>) -> Self {
        Self {
            dim: a.nrows(),
            m: vectorize(a) * vectorize(b).adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Cx<T>> {
        self.m
    }

    pub fn apply(&self, x: &DMatrix<Cx<T>>) -> Result<DMatrix<Cx<T>>> {
        check_dims(self.dim, x.nrows())?;
        devectorize(&(&self.m * vectorize(x)), self.dim)
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        check_dims(self.dim, inner.dim)?;
        Ok(Self {
            dim: self.dim,
            m: &self.m * &inner.m,
        })
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            dim: self.dim,
            m: &self.m * Complex::new(a, T::zero()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            m: &self.m - &other.m,
        })
    }

    /// e^{t·self} via nalgebra's scaling-and-squaring Padé exponential.
    pub fn exp_scaled(&self, t: T) -> Result<Self> {
        let m = (&self.m * Complex::new(t, T::zero())).exp();
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Convergence("matrix exponential overflowed".into()));
        }
        Ok(Self { dim: self.dim, m })
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.m - &other.m)
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }

    pub fn norm(&self) -> T {
        self.m.norm()
    }
}

impl<'a, T: Scalar> Mul<&'a SuperMatrix<T>> for &'a SuperMatrix<T> {
    type Output = SuperMatrix<T>;
    fn mul(self, rhs: Self) -> SuperMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        SuperMatrix {
            dim: self.dim,
            m: &self.m * &rhs.m,
        }
    }
}
