//! Time-parametrised Hamiltonian families on [0, τ].
//!
//! A path is stored on the unit interval, H(t) = h(t/τ), so the same
//! geometric path can be replayed at any duration.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dims, Error, Result};
use crate::lindblad::{GeneratorFamily, GeneratorKind, Lindbladian};
use crate::operator::log_partition_function;
use crate::Hermitian;

/// Schedule on the unit interval.
pub type UnitFn = Arc<dyn Fn(f64) -> Hermitian + Send + Sync>;

const FD_STEP: f64 = 1e-6;

/// Protocol H(t), t ∈ [0, τ], at inverse temperature β.
#[derive(Clone)]
pub struct ProtocolPath {
    tau: f64,
    beta: f64,
    unit: UnitFn,
    unit_derivative: Option<UnitFn>,
    start: Hermitian,
    end: Hermitian,
}

impl fmt::Debug for ProtocolPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolPath")
            .field("tau", &self.tau)
            .field("beta", &self.beta)
            .field("dim", &self.start.dim())
            .field("analytic_derivative", &self.unit_derivative.is_some())
            .finish()
    }
}

impl ProtocolPath {
    /// Path from a schedule on the unit interval, s = t/τ, with an optional
    /// analytic d/ds.
    pub fn from_unit_schedule(
        tau: f64,
        beta: f64,
        schedule: impl Fn(f64) -> Hermitian + Send + Sync + 'static,
        derivative: Option<UnitFn>,
    ) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!("protocol duration must be > 0, got {tau}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("inverse temperature must be > 0, got {beta}")));
        }
        let start = schedule(0.0);
        let end = schedule(1.0);
        check_dims(start.dim(), end.dim())?;
        Ok(Self {
            tau,
            beta,
            unit: Arc::new(schedule),
            unit_derivative: derivative,
            start,
            end,
        })
    }

    /// Path from a schedule in physical time t ∈ [0, τ]; Ḣ by central
    /// differences unless [`Self::with_time_derivative`] is used.
    pub fn new(tau: f64, beta: f64, schedule: impl Fn(f64) -> Hermitian + Send + Sync + 'static) -> Result<Self> {
        Self::from_unit_schedule(tau, beta, move |s| schedule(s * tau), None)
    }

    /// Attaches an analytic Ḣ(t) given in physical time.
    pub fn with_time_derivative(mut self, derivative: impl Fn(f64) -> Hermitian + Send + Sync + 'static) -> Self {
        let tau = self.tau;
        self.unit_derivative = Some(Arc::new(move |s| derivative(s * tau) * tau));
        self
    }

    /// H(t) = H₀ + (t/τ)(H_τ − H₀).
    pub fn linear(h0: Hermitian, h1: Hermitian, tau: f64, beta: f64) -> Result<Self> {
        check_dims(h0.dim(), h1.dim())?;
        let diff = &h1 - &h0;
        let d2 = diff.clone();
        Self::from_unit_schedule(
            tau,
            beta,
            move |s| &h0 + &(&diff * s),
            Some(Arc::new(move |_| d2.clone())),
        )
    }

    /// H(t) = H for all t.
    pub fn constant(h: Hermitian, tau: f64, beta: f64) -> Result<Self> {
        let zero = Hermitian::zeros(h.dim());
        Self::from_unit_schedule(tau, beta, move |_| h.clone(), Some(Arc::new(move |_| zero.clone())))
    }

    /// Same geometric path traversed in time `tau`.
    pub fn rescaled(&self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!("protocol duration must be > 0, got {tau}")));
        }
        Ok(Self { tau, ..self.clone() })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn start(&self) -> &Hermitian {
        &self.start
    }

    pub fn end(&self) -> &Hermitian {
        &self.end
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.unit_derivative.is_some()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Hermitian {
        (self.unit)(t / self.tau)
    }

    /// Ḣ(t), analytic when available.
    pub fn derivative_at(&self, t: f64) -> Hermitian {
        match &self.unit_derivative {
            Some(d) => d(t / self.tau) * (1.0 / self.tau),
            None => self.numerical_derivative_at(t),
        }
    }

    /// Second-order finite difference with step τ·1e-6, one-sided within a
    /// step of the endpoints.
    pub fn numerical_derivative_at(&self, t: f64) -> Hermitian {
        let s = t / self.tau;
        let h = FD_STEP;
        let f = |x: f64| (self.unit)(x);
        let ds = if s - h < 0.0 {
            (&(&(f(s + h) * 4.0) - &(f(s) * 3.0)) - &f(s + 2.0 * h)) * (0.5 / h)
        } else if s + h > 1.0 {
            (&(&(f(s) * 3.0) - &(f(s - h) * 4.0)) + &f(s - 2.0 * h)) * (0.5 / h)
        } else {
            (&f(s + h) - &f(s - h)) * (0.5 / h)
        };
        ds * (1.0 / self.tau)
    }

    /// Largest relative deviation between the analytic Ḣ and finite
    /// differences over `samples` interior points.
    pub fn derivative_consistency(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let t = self.tau * (k as f64 + 0.5) / samples as f64;
                let a = self.derivative_at(t);
                let n = self.numerical_derivative_at(t);
                let scale = a.frobenius_norm().max(n.frobenius_norm()).max(f64::MIN_POSITIVE);
                (&a - &n).frobenius_norm() / scale
            })
            .fold(0.0, f64::max)
    }

    /// ΔF = −β⁻¹ ln(Z_τ/Z₀).
    pub fn delta_free_energy(&self) -> Result<f64> {
        let l0 = log_partition_function(&self.start, self.beta)?;
        let l1 = log_partition_function(&self.end, self.beta)?;
        Ok(-(l1 - l0) / self.beta)
    }
}

/// Generators built along a protocol path: t ↦ kind.build(H(t), β).
#[derive(Debug, Clone)]
pub struct DrivenFamily {
    path: ProtocolPath,
    kind: GeneratorKind,
}

impl DrivenFamily {
    pub fn new(path: ProtocolPath, kind: GeneratorKind) -> Self {
        Self { path, kind }
    }

    pub fn path(&self) -> &ProtocolPath {
        &self.path
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }
}

impl GeneratorFamily for DrivenFamily {
    fn dim(&self) -> usize {
        self.path.dim()
    }

    fn beta(&self) -> f64 {
        self.path.beta()
    }

    fn generator_at(&self, t: f64) -> Result<Lindbladian> {
        self.kind.build(&self.path.hamiltonian_at(t), self.path.beta())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli;

    #[test]
    fn linear_path_derivative_and_endpoints() {
        let p = ProtocolPath::linear(pauli::sz(), pauli::sx(), 4.0, 1.0).unwrap();
        assert!(p.start().max_abs_diff(&pauli::sz()) == 0.0);
        assert!(p.hamiltonian_at(4.0).max_abs_diff(&pauli::sx()) < 1e-15);
        assert!(p.derivative_consistency(9) < 1e-8);
        let expected = (&pauli::sx() - &pauli::sz()) * 0.25;
        assert!(p.derivative_at(1.3).max_abs_diff(&expected) < 1e-15);
        assert!(p.numerical_derivative_at(0.0).max_abs_diff(&expected) < 1e-8);
        assert!(p.numerical_derivative_at(4.0).max_abs_diff(&expected) < 1e-8);
    }

    #[test]
    fn rescaling_keeps_geometry() {
        let p = ProtocolPath::new(2.0, 1.0, |t| pauli::bloch(t.sin(), 0.0, 1.0 + t)).unwrap();
        let q = p.rescaled(6.0).unwrap();
        assert!(p.hamiltonian_at(1.0).max_abs_diff(&q.hamiltonian_at(3.0)) < 1e-15);
        let dp = p.derivative_at(1.0);
        let dq = q.derivative_at(3.0);
        assert!(dp.max_abs_diff(&(dq * 3.0)) < 1e-8);
    }

    #[test]
    fn free_energy_of_a_qubit_ramp() {
        let p = ProtocolPath::linear(pauli::sz() * 0.5, pauli::sz() * 2.0, 1.0, 0.8).unwrap();
        let expected = -((2.0 * (0.8_f64 * 2.0).cosh()).ln() - (2.0 * (0.8_f64 * 0.5).cosh()).ln()) / 0.8;
        assert!((p.delta_free_energy().unwrap() - expected).abs() < 1e-14);
    }
}
