//! Dense Hermitian-operator algebra.
//!
//! Every routine here is generic over the real scalar `T: Scalar`. All matrix
//! functions go through [`hermitian_eigen`], so there is exactly one numerical
//! pathway for spectra, Gibbs states, fractional powers and the mean maps.

mod hermitian;
mod means;
mod superop;

pub use hermitian::{
    gibbs_state, hermitian_eigen, log_partition_function, matrix_power, partial_trace_second,
    relative_entropy, DensityMatrix, HermitianMatrix, Spectrum,
};
pub use means::{
    log_mean, mean_gap, mean_images, mmap, jmap, smap, wyd_skew_information, MeanImages,
};
pub use superop::{vectorize, devectorize, SuperMatrix};

use nalgebra::RealField;

/// Real scalar underlying the complex operator entries.
///
/// Contract tolerances depend on the precision, so they live on the trait.
pub trait Scalar: RealField + Copy {
    /// Relative tolerance for Hermiticity, unit trace and positivity contracts.
    const CONTRACT_TOL: f64;
    /// Populations are clamped below at this value before logarithms.
    const POPULATION_FLOOR: f64;

    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }
}

impl Scalar for f64 {
    const CONTRACT_TOL: f64 = 1e-12;
    const POPULATION_FLOOR: f64 = 1e-300;
}

impl Scalar for f32 {
    const CONTRACT_TOL: f64 = 1e-5;
    const POPULATION_FLOOR: f64 = 1e-37;
}
