//! Concrete systems: the thermalised harmonic oscillator, qubit protocols on
//! the Bloch sphere and the strong-coupling quench chain.

mod oscillator;
mod quench;
mod qubit;

pub use oscillator::{
    implicit_equation_residual, oscillator_force, NumericMetrics, OscillatorChart, OscillatorMetric,
    OscillatorModel, MAX_TRUNCATION,
};
pub use quench::{
    quench_continuum_check, quench_statistics, relative_entropy_dissipation, ContinuumIntegrals, QuenchReport,
    QuenchRow, QuenchSequence, QUENCH_DIMENSION_CAP,
};
pub use qubit::{qubit_protocol_classical, qubit_protocol_quantum, QubitSphericalProtocol, Schedule};
