//! Qubit protocols in spherical coordinates,
//! H = r(sin θ cos φ σx + sin θ sin φ σy + cos θ σz), under the qubit–boson
//! generator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lindblad::GeneratorKind;
use crate::pauli;
use crate::protocol::{DrivenFamily, ProtocolPath};
use crate::Hermitian;

/// s ↦ (value, d/ds) on the unit interval.
pub type Schedule = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

const POSITIVITY_SAMPLES: usize = 1001;

#[derive(Clone)]
pub struct QubitSphericalProtocol {
    pub r: Schedule,
    pub theta: Schedule,
    pub phi: Schedule,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl fmt::Debug for QubitSphericalProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QubitSphericalProtocol")
            .field("tau", &self.tau)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .finish()
    }
}

fn bloch_hamiltonian(r: f64, theta: f64, phi: f64) -> Hermitian {
    pauli::bloch(
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
        r * theta.cos(),
    )
}

impl QubitSphericalProtocol {
    /// Validates τ, β, γ > 0 and r(s) > 0 on a fine grid.
    pub fn new(r: Schedule, theta: Schedule, phi: Schedule, tau: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("protocol duration", tau), ("inverse temperature", beta), ("coupling rate", gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for k in 0..POSITIVITY_SAMPLES {
            let s = k as f64 / (POSITIVITY_SAMPLES - 1) as f64;
            let v = r(s).0;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("field magnitude r must stay > 0; r({s}) = {v}")));
            }
        }
        Ok(Self {
            r,
            theta,
            phi,
            tau,
            beta,
            gamma,
        })
    }

    /// H at unit time s = t/τ.
    pub fn hamiltonian_unit(&self, s: f64) -> Hermitian {
        bloch_hamiltonian((self.r)(s).0, (self.theta)(s).0, (self.phi)(s).0)
    }

    /// dH/ds from the schedule derivatives.
    pub fn derivative_unit(&self, s: f64) -> Hermitian {
        derivative(&self.r, &self.theta, &self.phi, s)
    }

    pub fn path(&self) -> Result<ProtocolPath> {
        let (r, th, ph) = (self.r.clone(), self.theta.clone(), self.phi.clone());
        let (r2, th2, ph2) = (self.r.clone(), self.theta.clone(), self.phi.clone());
        ProtocolPath::from_unit_schedule(
            self.tau,
            self.beta,
            move |s| bloch_hamiltonian(r(s).0, th(s).0, ph(s).0),
            Some(Arc::new(move |s| derivative(&r2, &th2, &ph2, s))),
        )
    }

    pub fn generator_kind(&self) -> GeneratorKind {
        GeneratorKind::QubitBoson { gamma: self.gamma }
    }

    pub fn family(&self) -> Result<DrivenFamily> {
        Ok(DrivenFamily::new(self.path()?, self.generator_kind()))
    }

    /// Same schedules at another duration.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.r.clone(), self.theta.clone(), self.phi.clone(), tau, self.beta, self.gamma)
    }

    /// ∫₀^τ ‖[H_t, Ḣ_t]‖_F dt by Simpson on `samples` points.
    pub fn coherence_integral(&self, samples: usize) -> Result<f64> {
        let n = (samples.max(3) | 1) as usize;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                let h = self.hamiltonian_unit(s);
                let d = self.derivative_unit(s) * (1.0 / self.tau);
                h.commutator_norm(&d)
            })
            .collect::<Result<_>>()?;
        crate::quad::simpson(&vals, self.tau / (n - 1) as f64)
    }
}

fn derivative(r: &Schedule, theta: &Schedule, phi: &Schedule, s: f64) -> Hermitian {
    let (rv, rd) = r(s);
    let (th, thd) = theta(s);
    let (ph, phd) = phi(s);
    let (st, ct, sp, cp) = (th.sin(), th.cos(), ph.sin(), ph.cos());
    // d/ds of r n̂
    let x = rd * st * cp + rv * (ct * cp * thd - st * sp * phd);
    let y = rd * st * sp + rv * (ct * sp * thd + st * cp * phd);
    let z = rd * ct - rv * st * thd;
    pauli::bloch(x, y, z)
}

/// r from `r0` to `r1` along σz: only the level splitting changes.
pub fn qubit_protocol_classical(r0: f64, r1: f64, tau: f64, beta: f64, gamma: f64) -> Result<QubitSphericalProtocol> {
    let dr = r1 - r0;
    QubitSphericalProtocol::new(
        Arc::new(move |s| (r0 + dr * s, dr)),
        Arc::new(|_| (0.0, 0.0)),
        Arc::new(|_| (0.0, 0.0)),
        tau,
        beta,
        gamma,
    )
}

/// r = sqrt(s² − 2s + 2), θ = atan2(1, 1 − s), φ = 0, i.e.
/// H(s) = σx + (1 − s)σz; the energy basis rotates by π/4.
pub fn qubit_protocol_quantum(tau: f64, beta: f64, gamma: f64) -> Result<QubitSphericalProtocol> {
    QubitSphericalProtocol::new(
        Arc::new(|s| {
            let r = (s * s - 2.0 * s + 2.0).sqrt();
            (r, (s - 1.0) / r)
        }),
        Arc::new(|s| {
            let u = 1.0 - s;
            (1.0f64.atan2(u), 1.0 / (1.0 + u * u))
        }),
        Arc::new(|_| (0.0, 0.0)),
        tau,
        beta,
        gamma,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_protocol_is_linear_in_sigma_z() {
        let p = qubit_protocol_quantum(3.0, 1.0, 1.0).unwrap();
        let h0 = p.hamiltonian_unit(0.0);
        assert!(h0.max_abs_diff(&pauli::bloch(1.0, 0.0, 1.0)) < 1e-14);
        assert!(((p.r)(0.0).0 - 2f64.sqrt()).abs() < 1e-15);
        assert!(((p.theta)(0.0).0 - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(((p.theta)(1.0).0 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let expect = pauli::bloch(1.0, 0.0, 1.0 - s);
            assert!(p.hamiltonian_unit(s).max_abs_diff(&expect) < 1e-14);
            assert!(p.derivative_unit(s).max_abs_diff(&(pauli::sz() * -1.0)) < 1e-14);
        }
        let path = p.path().unwrap();
        assert!(path.derivative_consistency(11) < 1e-8);
        assert!(p.coherence_integral(101).unwrap() > 0.1);
    }

    #[test]
    fn classical_protocol_commutes() {
        let p = qubit_protocol_classical(0.1, 1.0, 5.0, 1.0, 1.0).unwrap();
        assert!(p.coherence_integral(51).unwrap() < 1e-14);
        let path = p.path().unwrap();
        assert!(path.derivative_at(2.0).max_abs_diff(&(pauli::sz() * (0.9 / 5.0))) < 1e-15);
    }

    #[test]
    fn vanishing_field_is_rejected() {
        assert!(matches!(
            qubit_protocol_classical(0.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(qubit_protocol_quantum(-1.0, 1.0, 1.0).is_err());
    }
}
