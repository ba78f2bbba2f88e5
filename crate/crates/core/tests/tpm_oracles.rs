//! Two-point-measurement and weak-measurement oracles on closed systems.

mod common;

use common::{random_density, random_hermitian, rng};
use qfdr_core::exact::{
    tpm_distribution_global, unitary_step_propagators, weak_measurement_moments, UnitaryEvolution,
};
use qfdr_core::operator::{gibbs_state, log_partition_function};
use qfdr_core::protocol::ProtocolPath;
use qfdr_core::{pauli, CMatrix, Density, Error, Hermitian, C64};
use std::sync::Arc;

fn wiggly_path(seed: u64, d: usize, tau: f64, beta: f64) -> ProtocolPath {
    let mut r = rng(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let (a, b, c) = (
        random_hermitian(&mut r, d, scale),
        random_hermitian(&mut r, d, scale),
        random_hermitian(&mut r, d, 0.5 * scale),
    );
    let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
    let pi = std::f64::consts::PI;
    ProtocolPath::from_unit_schedule(
        tau,
        beta,
        move |s| &(&(&a * (1.0 - s)) + &(&b * s)) + &(&c * (pi * s).sin()),
        Some(Arc::new(move |s| &(&b2 - &a2) + &(&c2 * (pi * (pi * s).cos())))),
    )
    .unwrap()
}

fn commutator(h: &Hermitian, rho: &CMatrix) -> CMatrix {
    h.matrix() * rho - rho * h.matrix()
}

/// ⟨w⟩ = ∫ Tr[Ḣ_t ρ_t] dt by RK4 on (ρ, w) with ρ̇ = −i[H, ρ], ẇ = Tr[Ḣρ].
fn power_integral(path: &ProtocolPath, rho0: &Density, steps: usize) -> f64 {
    let h = path.tau() / steps as f64;
    let rhs = |t: f64, rho: &CMatrix| {
        let drho = commutator(&path.hamiltonian_at(t), rho) * C64::new(0.0, -1.0);
        (drho, (path.derivative_at(t).matrix() * rho).trace().re)
    };
    let axpy = |rho: &CMatrix, k: &CMatrix, c: f64| rho + k * C64::new(c, 0.0);
    let (mut rho, mut w) = (rho0.matrix().clone(), 0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let (k1, p1) = rhs(t, &rho);
        let (k2, p2) = rhs(t + 0.5 * h, &axpy(&rho, &k1, 0.5 * h));
        let (k3, p3) = rhs(t + 0.5 * h, &axpy(&rho, &k2, 0.5 * h));
        let (k4, p4) = rhs(t + h, &axpy(&rho, &k3, h));
        rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        w += h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    }
    w
}

#[test]
fn sudden_sigma_z_to_sigma_x_quench_is_analytic() {
    let beta = 0.8;
    let path = ProtocolPath::linear(pauli::sz(), pauli::sx(), 1e-9, beta).unwrap();
    let dist = tpm_distribution_global(&path, 4).unwrap();
    // ⟨w⟩ = Tr[(σx − σz)π₀] = tanh β, and every transition has probability ½
    assert!((dist.mean() - beta.tanh()).abs() < 1e-8);
    let p_ground = 1.0 / (1.0 + (-2.0 * beta).exp());
    let expect = [(-2.0, 0.5 * (1.0 - p_ground)), (0.0, 0.5), (2.0, 0.5 * p_ground)];
    assert_eq!(dist.support().len(), 3);
    for ((w, p), (ew, ep)) in dist.support().iter().zip(dist.probabilities()).zip(expect) {
        assert!((w - ew).abs() < 1e-12 && (p - ep).abs() < 1e-8, "({w}, {p}) vs ({ew}, {ep})");
    }
    assert!((dist.total_probability() - 1.0).abs() < 1e-14);
}

#[test]
fn constant_hamiltonian_gives_no_work() {
    let mut r = rng(3);
    let h = random_hermitian(&mut r, 4, 1.0);
    let path = ProtocolPath::constant(h, 2.0, 1.0).unwrap();
    let dist = tpm_distribution_global(&path, 8).unwrap();
    // off-diagonal transitions survive only at round-off level
    let rows = dist.significant(1e-14);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].0.abs() < 1e-12);
    assert!((rows[0].1 - 1.0).abs() < 1e-12);
    assert!((dist.exponential_average(1.0) - 1.0).abs() < 1e-12);
}

#[test]
fn jarzynski_holds_for_driven_composites() {
    for (seed, d) in [(1, 2), (2, 3), (3, 6), (4, 12)] {
        let beta = 0.5 + 0.3 * seed as f64;
        let path = wiggly_path(seed, d, 2.0, beta);
        let dist = tpm_distribution_global(&path, 32).unwrap();
        let ratio = (log_partition_function(path.end(), beta).unwrap() - log_partition_function(path.start(), beta).unwrap()).exp();
        assert!((dist.exponential_average(beta) - ratio).abs() < 1e-12);
        // second law: ⟨w⟩ ≥ ΔF
        assert!(dist.mean() >= -ratio.ln() / beta - 1e-12);
        assert!(dist.variance() > 0.0);
    }
}

#[test]
fn tpm_mean_is_the_integrated_power() {
    for (seed, d) in [(11, 2), (12, 4)] {
        let path = wiggly_path(seed, d, 3.0, 1.0);
        let rho0 = gibbs_state(path.start(), 1.0).unwrap();
        let dist = tpm_distribution_global(&path, 64).unwrap();
        let direct = power_integral(&path, &rho0, 4000);
        assert!((dist.mean() - direct).abs() < 1e-8, "d = {d}: {} vs {direct}", dist.mean());
    }
}

#[test]
fn weak_measurement_matches_tpm_for_thermal_states() {
    for (seed, d) in [(21, 2), (22, 5), (23, 9)] {
        let path = wiggly_path(seed, d, 1.5, 0.9);
        let dist = tpm_distribution_global(&path, 32).unwrap();
        let (m1, m2) = weak_measurement_moments(&path, None, 32).unwrap();
        assert!((m1 - dist.mean()).abs() < 1e-10);
        assert!((m2 - dist.moment(2)).abs() < 1e-10);
    }
}

#[test]
fn coherent_initial_states_separate_the_two_schemes() {
    let path = ProtocolPath::linear(pauli::sz(), pauli::bloch(1.0, 0.3, -0.5), 1.0, 1.0).unwrap();
    let mut r = rng(31);
    let rho = random_density(&mut r, 2);
    let (m1, _) = weak_measurement_moments(&path, Some(&rho), 32).unwrap();
    // dephasing in the H₀ (σz) basis erases what the first projective measurement would
    let mut dephased = rho.matrix().clone();
    dephased[(0, 1)] = C64::new(0.0, 0.0);
    dephased[(1, 0)] = C64::new(0.0, 0.0);
    let dephased = Density::new(dephased).unwrap();
    let (d1, _) = weak_measurement_moments(&path, Some(&dephased), 32).unwrap();
    assert!((m1 - d1).abs() > 1e-3);
    // the weak-measurement mean is the Heisenberg expectation of H_τ − H₀
    let evo = UnitaryEvolution::converged(&path, &rho, 32).unwrap();
    let u = &evo.unitary;
    let heis = u.adjoint() * path.end().matrix() * u - path.start().matrix();
    assert!(((heis * rho.matrix()).trace().re - m1).abs() < 1e-12);
    assert!(weak_measurement_moments(&path, Some(&random_density(&mut r, 3)), 32).is_err());
}

#[test]
fn magnus_steps_converge_at_fourth_order() {
    let path = wiggly_path(41, 3, 2.0, 1.0);
    let product = |n: usize| {
        unitary_step_propagators(&path, n)
            .unwrap()
            .iter()
            .fold(CMatrix::identity(3, 3), |acc, u| u * acc)
    };
    let reference = product(2048);
    let err = |n: usize| (product(n) - &reference).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let (e1, e2) = (err(16), err(32));
    let order = (e1 / e2).log2();
    assert!((3.7..4.3).contains(&order), "observed order {order} ({e1:e} → {e2:e})");
    for u in unitary_step_propagators(&path, 16).unwrap() {
        let defect = (u.adjoint() * &u - CMatrix::identity(3, 3)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(defect < 1e-14);
    }
}

#[test]
fn converged_evolution_meets_both_stop_conditions() {
    let path = wiggly_path(51, 64, 1.5, 1.0);
    let rho = gibbs_state(path.start(), 1.0).unwrap();
    let evo = UnitaryEvolution::converged(&path, &rho, 32).unwrap();
    assert!(evo.unitary_defect < 1e-12);
    assert!(evo.steps <= 1024);
}

#[test]
fn oracle_inputs_are_validated() {
    let big = Hermitian::zeros(65);
    let path = ProtocolPath::constant(big, 1.0, 1.0).unwrap();
    assert!(matches!(tpm_distribution_global(&path, 4), Err(Error::DimensionCap { .. })));
    let small = ProtocolPath::linear(pauli::sz(), pauli::sx(), 1.0, 1.0).unwrap();
    assert!(matches!(unitary_step_propagators(&small, 0), Err(Error::Domain(_))));
}
