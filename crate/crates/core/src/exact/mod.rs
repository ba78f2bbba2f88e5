//! Exact routes to the work statistics.
//!
//! * [`evolve`] integrates the master equation and keeps the per-step
//!   propagators, from which [`exact_dissipated_work`] and the double integral
//!   [`exact_work_variance`] (or its nested-trapezoid form
//!   [`exact_work_variance_nested`]) are evaluated.
//! * [`tpm_distribution_global`] and [`weak_measurement_moments`] are
//!   brute-force unitary oracles on a composite system.

mod tpm;
mod trajectory;

pub use tpm::{
    tpm_distribution_global, unitary_step_propagators, weak_measurement_moments, TpmDistribution,
    UnitaryEvolution, TPM_DIMENSION_CAP,
};
pub use trajectory::{
    evolve, exact_dissipated_work, exact_statistics, exact_work_variance, exact_work_variance_nested,
    TrajectorySolution,
};
