//! Work statistics of slowly driven open quantum systems.
//!
//! The crate computes the slow-driving dissipated work, work variance and
//! their quantum correction for Lindblad dynamics with instantaneous Gibbs
//! fixed points, the associated fluctuation/dissipation metrics on control
//! space, geodesic protocols and Pareto fronts. Every slow-driving quantity
//! has an independent exact route (master-equation integration, two-point
//! measurement statistics, discrete quench chains) for cross-validation.
//!
//! Units: ħ = k_B = 1.

pub mod error;
pub mod exact;
pub mod geometry;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod protocol;
pub mod quad;
pub mod slow;

pub use error::{Error, Result};

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type Hermitian = operator::HermitianMatrix<f64>;
pub type Density = operator::DensityMatrix<f64>;
pub type Spectrum = operator::Spectrum<f64>;
pub type Super = operator::SuperMatrix<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Pauli matrices and small helpers used throughout the model code.
pub mod pauli {
    use super::{Hermitian, C64};
    use nalgebra::DMatrix;

    fn from_rows(rows: [[C64; 2]; 2]) -> Hermitian {
        let m = DMatrix::from_fn(2, 2, |i, j| rows[i][j]);
        Hermitian::new(m).expect("Pauli matrices are Hermitian")
    }

    pub fn sx() -> Hermitian {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        from_rows([[o, l], [l, o]])
    }

    pub fn sy() -> Hermitian {
        let (o, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        from_rows([[o, -i], [i, o]])
    }

    pub fn sz() -> Hermitian {
        Hermitian::from_real_diagonal(&[1.0, -1.0])
    }

    /// x σx + y σy + z σz.
    pub fn bloch(x: f64, y: f64, z: f64) -> Hermitian {
        sx() * x + sy() * y + sz() * z
    }
}
