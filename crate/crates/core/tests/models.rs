//! Quench chains, qubit protocols and the oscillator against independent
//! constructions.

mod common;

use common::{random_hermitian, rng};
use proptest::prelude::*;
use qfdr_core::geometry::chart_metrics;
use qfdr_core::models::{
    qubit_protocol_quantum, quench_continuum_check, quench_statistics, relative_entropy_dissipation,
    ContinuumIntegrals, OscillatorChart, OscillatorModel, QuenchSequence,
};
use qfdr_core::{pauli, Error, Hermitian};
use rand::Rng;

fn random_sequence(seed: u64) -> QuenchSequence {
    let mut r = rng(seed);
    let ds = 2 + (seed % 2) as usize;
    QuenchSequence::linear(
        random_hermitian(&mut r, ds, 1.0),
        random_hermitian(&mut r, ds, 1.0),
        random_hermitian(&mut r, 2, 1.0),
        random_hermitian(&mut r, 2 * ds, 1.0),
        r.random_range(0.0..1.0),
        r.random_range(0.3..2.0),
        8 + (seed % 13) as usize,
    )
    .unwrap()
}

// Per quench, β⁻¹ ln⟨e^{−β(ΔH − ⟨ΔH⟩)}⟩ = βσ²/2 − β²κ₃/6 + …; the inequality
// needs the O(1/N) quantum gap to dominate the O(1/N²) cumulant terms, so
// only chains with N ≥ 8 are asserted.
#[test]
fn random_quench_chains_obey_the_inequality() {
    let mut worst = f64::INFINITY;
    for seed in 0..100 {
        let seq = random_sequence(seed);
        let s = quench_statistics(&seq).unwrap();
        let gap = 0.5 * seq.beta() * s.sigma2 - s.w_diss;
        assert!(gap >= -1e-9, "seed {seed}: βσ²/2 − W = {gap:e}");
        assert!(s.w_diss >= -1e-12);
        worst = worst.min(gap);
        // dissipation is the summed relative entropy between neighbouring stages
        let rel = relative_entropy_dissipation(&seq).unwrap();
        assert!((rel - s.w_diss).abs() < 1e-10 * (1.0 + s.w_diss.abs()), "seed {seed}: {rel} vs {}", s.w_diss);
    }
    assert!(worst.is_finite());
}

#[test]
fn weak_coupling_recovers_the_reduced_skew() {
    let mut r = rng(77);
    let (h0, h1) = (random_hermitian(&mut r, 2, 1.0), random_hermitian(&mut r, 2, 1.0));
    let bath = random_hermitian(&mut r, 2, 1.0);
    let v = random_hermitian(&mut r, 4, 1.0);
    let gap_at = |g: f64| {
        let seq = QuenchSequence::linear(h0.clone(), h1.clone(), bath.clone(), v.clone(), g, 1.0, 16).unwrap();
        let c = ContinuumIntegrals::compute(&seq).unwrap();
        (c.skew - c.skew_reduced).abs() / c.skew_reduced
    };
    let (g1, g2) = (gap_at(1e-2), gap_at(1e-3));
    assert!(g2 < 1e-4, "reduced vs global skew at g = 1e-3: {g2:e}");
    // the discrepancy closes at least linearly in the coupling
    assert!(g1 / g2 > 8.0, "{g1:e} → {g2:e}");
    assert!(gap_at(0.0) < 1e-12);
}

#[test]
fn commuting_chain_has_no_quantum_gap_in_the_continuum() {
    // H(s) = (1 + s)σz with V = σz⊗σx: everything commutes with Ḣ⊗1
    let seq = QuenchSequence::linear(
        pauli::sz(),
        pauli::sz() * 2.0,
        pauli::sz(),
        pauli::sz().kron(&pauli::sx()),
        0.7,
        1.0,
        8,
    )
    .unwrap();
    let report = quench_continuum_check(&seq, &[8, 16, 32, 64]).unwrap();
    assert!(report.continuum.skew.abs() < 1e-12);
    for row in &report.rows {
        assert!(row.q_w_pred.abs() < 1e-12);
        // N·gap → 0
        assert!((row.n as f64 * row.gap()).abs() < 0.2 / row.n as f64, "N = {}: gap {:e}", row.n, row.gap());
    }
}

#[test]
fn strong_coupling_gap_tracks_the_prediction() {
    let seq = QuenchSequence::linear(
        pauli::bloch(1.0, 0.0, 1.0),
        pauli::sx(),
        pauli::sz(),
        pauli::sx().kron(&pauli::sx()),
        0.5,
        1.0,
        8,
    )
    .unwrap();
    let report = quench_continuum_check(&seq, &[8, 16, 32, 64, 128]).unwrap();
    for row in &report.rows {
        assert!(row.gap() > 0.0);
        assert!((row.gap() - row.q_w_pred).abs() < 0.1 * row.q_w_pred);
    }
    let p = report.residual_exponent();
    assert!((0.8..1.2).contains(&p), "N·W residual exponent {p}");
}

#[test]
fn invalid_quench_inputs_are_rejected() {
    let h = pauli::sz();
    let v = pauli::sx().kron(&pauli::sx());
    assert!(matches!(
        QuenchSequence::linear(h.clone(), h.clone(), h.clone(), v.clone(), 0.5, 1.0, 1),
        Err(Error::Domain(_))
    ));
    assert!(QuenchSequence::linear(h.clone(), h.clone(), h.clone(), v.clone(), 0.5, -1.0, 4).is_err());
    assert!(matches!(
        QuenchSequence::linear(h.clone(), h.clone(), h.clone(), pauli::sx(), 0.5, 1.0, 4),
        Err(Error::DimensionMismatch { .. })
    ));
    let big = Hermitian::zeros(40);
    assert!(matches!(
        QuenchSequence::linear(big.clone(), big, h, Hermitian::zeros(80), 0.5, 1.0, 4),
        Err(Error::DimensionCap { .. })
    ));
}

#[test]
fn quantum_qubit_coherence_integral_is_closed_form() {
    // ‖[σx + (1 − s)σz, −σz/τ]‖_F = 2√2/τ, so the integral is 2√2 for any τ
    for tau in [0.5, 3.0, 40.0] {
        let p = qubit_protocol_quantum(tau, 1.0, 1.0).unwrap();
        let c = p.coherence_integral(101).unwrap();
        assert!((c - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oscillator_chart_matches_closed_forms(beta in 0.3f64..3.0, gamma in 0.2f64..2.0, omega in 0.3f64..4.0) {
        let model = OscillatorModel::new(omega, 2.0 * omega, beta, gamma).unwrap();
        let num = model.metrics_numeric(omega).unwrap();
        let (l, x) = model.metrics_closed_form(omega).unwrap();
        prop_assert!(((num.lambda - l) / l).abs() < 1e-6);
        prop_assert!(((num.xi - x) / x).abs() < 1e-6);
        prop_assert!(num.lambda > num.xi);
        // the same numbers through the generic chart machinery
        let chart = OscillatorChart::new(beta, gamma, num.dim).unwrap();
        let p = chart_metrics(&chart, &[omega]).unwrap();
        prop_assert!((p.fluctuation[(0, 0)] - num.lambda).abs() < 1e-12 * num.lambda);
    }
}

#[test]
fn oscillator_limits() {
    let gamma = 0.8;
    // β → 0: Λ ≈ ξ ≈ 2/(βΓω²)
    let hot = OscillatorModel::new(1.0, 2.0, 1e-4, gamma).unwrap();
    let (l, x) = hot.metrics_closed_form(1.5).unwrap();
    let lead = 2.0 / (1e-4 * gamma * 1.5 * 1.5);
    assert!((l - lead).abs() < 1e-6 * lead && (x - lead).abs() < 1e-6 * lead);
    assert!(((l - x) / l - (1e-4f64 * 1.5).powi(2) / 6.0).abs() < 1e-12);
    // β → ∞: Λ → β/(2Γ) grows, ξ → 1/(2Γω)
    let cold = OscillatorModel::new(1.0, 2.0, 80.0, gamma).unwrap();
    let (l, x) = cold.metrics_closed_form(1.0).unwrap();
    assert!((l - 80.0 / (2.0 * gamma)).abs() < 1e-10 * l);
    assert!((x - 1.0 / (2.0 * gamma)).abs() < 1e-2 / (2.0 * gamma));
    assert!(matches!(OscillatorModel::new(0.0, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
}
