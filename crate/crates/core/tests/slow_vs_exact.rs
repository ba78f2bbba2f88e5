//! Slow-driving formulas against exact master-equation routes and an
//! independent augmented-ODE integration of the variance double integral.

mod common;

use common::{random_hermitian, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use qfdr_core::exact::{evolve, exact_statistics, exact_work_variance_nested};
use qfdr_core::geometry::{cost_of_path, LinearChart, LinearRamp};
use qfdr_core::lindblad::{perfect_thermalizer, FlatBath, GeneratorFamily, GeneratorKind};
use qfdr_core::models::qubit_protocol_quantum;
use qfdr_core::operator::{gibbs_state, wyd_skew_information};
use qfdr_core::protocol::{DrivenFamily, ProtocolPath};
use qfdr_core::slow::{dynamical_skew_information, fdr_report, slow_integrals};
use qfdr_core::{CMatrix, Hermitian, C64};
use rand::Rng;
use std::sync::Arc;

fn davies_kind(couplings: Vec<Hermitian>, gamma: f64, beta: f64) -> GeneratorKind {
    GeneratorKind::Davies {
        couplings,
        bath: Arc::new(FlatBath::new(gamma, beta)),
    }
}

/// (W_diss, σ²) by RK4 on ρ̇ = ℒρ, Ẏ = ℒY + ½{ρ, Ḣ − Tr[Ḣρ]},
/// ẇ = Tr[Ḣρ], v̇ = 2Tr[ḢY]; Y(t) is the inner integral of the variance.
fn augmented_ode_oracle(path: &ProtocolPath, family: &DrivenFamily, steps: usize) -> (f64, f64) {
    let d = path.dim();
    let rho0 = gibbs_state(path.start(), path.beta()).unwrap().matrix().clone();
    type State = (CMatrix, CMatrix, f64, f64);
    let rhs = |t: f64, s: &State| -> State {
        let l = family.generator_at(t).unwrap();
        let hd = path.derivative_at(t);
        let h = hd.matrix();
        let mean = (h * &s.0).trace().re;
        let delta = h - CMatrix::identity(d, d) * C64::new(mean, 0.0);
        let source = (&s.0 * &delta + &delta * &s.0) * C64::new(0.5, 0.0);
        (
            l.apply(&s.0).unwrap(),
            l.apply(&s.1).unwrap() + source,
            mean,
            2.0 * (h * &s.1).trace().re,
        )
    };
    let axpy = |s: &State, k: &State, a: f64| -> State {
        (
            &s.0 + &k.0 * C64::new(a, 0.0),
            &s.1 + &k.1 * C64::new(a, 0.0),
            s.2 + a * k.2,
            s.3 + a * k.3,
        )
    };
    let dt = path.tau() / steps as f64;
    let mut s: State = (rho0, CMatrix::zeros(d, d), 0.0, 0.0);
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs(t, &s);
        let k2 = rhs(t + 0.5 * dt, &axpy(&s, &k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, &axpy(&s, &k2, 0.5 * dt));
        let k4 = rhs(t + dt, &axpy(&s, &k3, dt));
        let sum = axpy(&axpy(&axpy(&k1, &k2, 2.0), &k3, 2.0), &k4, 1.0);
        s = axpy(&s, &sum, dt / 6.0);
    }
    (s.2 - path.delta_free_energy().unwrap(), s.3)
}

fn davies_protocol(seed: u64, d: usize, tau: f64) -> (ProtocolPath, DrivenFamily) {
    let mut r = rng(seed);
    let beta = 0.8;
    let h0 = random_hermitian(&mut r, d, 1.0);
    let h1 = random_hermitian(&mut r, d, 1.0);
    let a = random_hermitian(&mut r, d, 1.0);
    let path = ProtocolPath::linear(h0, h1, tau, beta).unwrap();
    let fam = DrivenFamily::new(path.clone(), davies_kind(vec![a], 0.7, beta));
    (path, fam)
}

#[test]
fn exact_variance_matches_augmented_ode_qubit() {
    let p = qubit_protocol_quantum(5.0, 1.0, 1.0).unwrap();
    let (path, fam) = (p.path().unwrap(), p.family().unwrap());
    let (w_oracle, var_oracle) = augmented_ode_oracle(&path, &fam, 4000);
    let rho0 = gibbs_state(path.start(), 1.0).unwrap();
    let traj = evolve(&fam, &rho0, path.tau(), 800).unwrap();
    let ex = exact_statistics(&traj, &path).unwrap();
    assert!((ex.w_diss - w_oracle).abs() < 1e-7 * w_oracle.abs().max(1.0), "{} vs {w_oracle}", ex.w_diss);
    assert!((ex.sigma2 - var_oracle).abs() < 1e-6 * var_oracle, "{} vs {var_oracle}", ex.sigma2);
}

#[test]
fn exact_variance_matches_augmented_ode_davies() {
    let (path, fam) = davies_protocol(31, 3, 3.0);
    let (w_oracle, var_oracle) = augmented_ode_oracle(&path, &fam, 3000);
    let rho0 = gibbs_state(path.start(), path.beta()).unwrap();
    let traj = evolve(&fam, &rho0, path.tau(), 600).unwrap();
    let ex = exact_statistics(&traj, &path).unwrap();
    // step propagators are self-consistent to 1e-8 each, which bounds the
    // accuracy of the trajectory at a few 1e-7 over hundreds of steps
    assert!((ex.w_diss - w_oracle).abs() < 1e-6 * w_oracle, "{} vs {w_oracle}", ex.w_diss);
    assert!((ex.sigma2 - var_oracle).abs() < 1e-6 * var_oracle, "{} vs {var_oracle}", ex.sigma2);
    let nested = exact_work_variance_nested(&traj, &path).unwrap();
    assert!((nested - var_oracle).abs() < 1e-3 * var_oracle);
    assert!((ex.w_mean - ex.w_diss - path.delta_free_energy().unwrap()).abs() < 1e-14);
}

#[test]
fn sudden_quench_limit() {
    let (path, fam) = davies_protocol(32, 2, 1e-3);
    let beta = path.beta();
    let pi0 = gibbs_state(path.start(), beta).unwrap();
    let dh = path.end() - path.start();
    let mean = dh.expectation(&pi0).unwrap();
    let var = Hermitian::new(dh.matrix() * dh.matrix()).unwrap().expectation(&pi0).unwrap() - mean * mean;
    let w_quench = mean - path.delta_free_energy().unwrap();
    let traj = evolve(&fam, &pi0, path.tau(), 64).unwrap();
    let ex = exact_statistics(&traj, &path).unwrap();
    assert!((ex.w_diss - w_quench).abs() < 5e-3 * w_quench, "{} vs {w_quench}", ex.w_diss);
    assert!((ex.sigma2 - var).abs() < 5e-3 * var, "{} vs {var}", ex.sigma2);
}

#[test]
fn exact_converges_to_slow_with_second_order_residual() {
    let mut residuals = Vec::new();
    for tau in [20.0, 40.0] {
        let (path, fam) = davies_protocol(33, 2, tau);
        let slow = slow_integrals(&path, &fam, 65).unwrap();
        let rho0 = gibbs_state(path.start(), path.beta()).unwrap();
        let traj = evolve(&fam, &rho0, tau, 400).unwrap();
        let ex = exact_statistics(&traj, &path).unwrap();
        residuals.push((ex.w_diss - slow.w_diss).abs());
        assert!((ex.w_diss - slow.w_diss).abs() < 0.1 * slow.w_diss);
    }
    let ratio = residuals[0] / residuals[1];
    assert!((3.0..5.0).contains(&ratio), "residual ratio {ratio}");
}

#[test]
fn commuting_protocols_obey_classical_fdr() {
    let mut r = rng(34);
    for k in 0..6 {
        let d = 2 + k % 3;
        let e0: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let e1: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let u = random_hermitian(&mut r, d, 1.0).eigen().vectors().clone();
        let h0 = Hermitian::from_real_diagonal(&e0).conjugate_by(&u).unwrap();
        let h1 = Hermitian::from_real_diagonal(&e1).conjugate_by(&u).unwrap();
        let beta = r.random_range(0.3..2.0);
        let path = ProtocolPath::linear(h0, h1, 4.0, beta).unwrap();
        let kind = if k % 2 == 0 {
            GeneratorKind::Thermalizer { rate: 1.3 }
        } else {
            davies_kind(vec![random_hermitian(&mut r, d, 1.0)], 0.9, beta)
        };
        let s = slow_integrals(&path, &DrivenFamily::new(path.clone(), kind), 33).unwrap();
        let half = 0.5 * beta * s.sigma2;
        assert!((half - s.w_diss).abs() < 1e-8 * s.w_diss, "k = {k}");
        assert!(s.q_w.abs() < 1e-10 * s.w_diss.max(1.0));
    }
}

#[test]
fn slow_quantities_scale_as_inverse_duration() {
    let (path, fam) = davies_protocol(35, 3, 2.0);
    let a = slow_integrals(&path, &fam, 33).unwrap();
    let long = path.rescaled(8.0).unwrap();
    let fam_long = DrivenFamily::new(long.clone(), fam.kind().clone());
    let b = slow_integrals(&long, &fam_long, 33).unwrap();
    for (x, y) in [(a.sigma2, b.sigma2), (a.w_diss, b.w_diss), (a.q_w, b.q_w)] {
        assert!((x - 4.0 * y).abs() < 1e-9 * x.abs().max(1e-12), "{x} vs {}", 4.0 * y);
    }
    let rep = fdr_report(&path, &fam, 33).unwrap();
    assert!((0.5 * path.beta() * rep.sigma2 - rep.w_diss - rep.q_w).abs() < 1e-12);
}

#[test]
fn metric_line_integrals_reproduce_slow_statistics() {
    let mut r = rng(36);
    let d = 3;
    let beta = 0.9;
    let x0 = random_hermitian(&mut r, d, 1.0);
    let x1 = random_hermitian(&mut r, d, 1.0);
    let x2 = random_hermitian(&mut r, d, 0.5);
    let a = random_hermitian(&mut r, d, 1.0);
    let kind = davies_kind(vec![a], 0.8, beta);
    let chart = LinearChart::new(x0.clone(), vec![x1.clone(), x2.clone()], beta, kind.clone()).unwrap();
    let (l0, l1) = (vec![-0.4, 0.2], vec![0.6, -0.3]);
    let tau = 3.0;
    let ramp = LinearRamp {
        start: l0.clone(),
        end: l1.clone(),
        tau,
    };
    let h = |l: &[f64]| &(&x0 + &(&x1 * l[0])) + &(&x2 * l[1]);
    let path = ProtocolPath::linear(h(&l0), h(&l1), tau, beta).unwrap();
    let slow = slow_integrals(&path, &DrivenFamily::new(path.clone(), kind), 65).unwrap();
    let cost = cost_of_path(&chart, &ramp, 0.5, 24).unwrap();
    let half = 0.5 * beta * slow.sigma2;
    assert!((cost.sigma_tilde2 - half).abs() < 1e-7 * half, "{} vs {half}", cost.sigma_tilde2);
    assert!((cost.w_diss - slow.w_diss).abs() < 1e-7 * slow.w_diss);
    assert!((cost.cost - 0.5 * (half + slow.w_diss)).abs() < 1e-7 * half);
}

#[test]
fn thermalizer_skew_is_wyd_over_rate() {
    let mut r = rng(37);
    for d in [2, 3, 5] {
        let h = random_hermitian(&mut r, d, 1.0);
        let a = random_hermitian(&mut r, d, 1.0);
        let rate = 0.4 + d as f64 * 0.3;
        let l = perfect_thermalizer(&h, 1.2, rate).unwrap();
        let pi = gibbs_state(&h, 1.2).unwrap();
        let expect = wyd_skew_information(&pi, &a).unwrap() / rate;
        assert!((dynamical_skew_information(&l, &a).unwrap() - expect).abs() < 1e-13);
    }
}

fn random_kind(r: &mut impl Rng, d: usize, beta: f64, pick: usize) -> GeneratorKind {
    match pick % 3 {
        0 => GeneratorKind::Thermalizer {
            rate: r.random_range(0.3..2.0),
        },
        1 if d == 2 => GeneratorKind::QubitBoson {
            gamma: r.random_range(0.3..2.0),
        },
        _ => davies_kind(vec![random_hermitian(r, d, 1.0)], r.random_range(0.3..1.5), beta),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantum_correction_is_nonnegative(seed in any::<u64>(), pick in 0usize..3, d in 2usize..=3) {
        let mut r = rng(seed);
        let beta = r.random_range(0.3..2.0);
        let h0 = random_hermitian(&mut r, d, 1.0);
        let h1 = random_hermitian(&mut r, d, 1.0);
        let kind = random_kind(&mut r, d, beta, pick);
        let path = ProtocolPath::linear(h0, h1, 2.0, beta).unwrap();
        let s = slow_integrals(&path, &DrivenFamily::new(path.clone(), kind), 33).unwrap();
        prop_assert!(s.q_w >= -1e-10);
        prop_assert!(0.5 * beta * s.sigma2 >= s.w_diss - 1e-10);
        let from_fdr = 0.5 * beta * s.sigma2 - s.w_diss;
        prop_assert!((from_fdr - s.q_w).abs() < 1e-7 * s.w_diss.max(1e-3));
    }
}

#[test]
fn static_protocol_has_no_dissipation() {
    let h = Hermitian::from_real(&DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, -0.5])).unwrap();
    let path = ProtocolPath::constant(h, 2.0, 1.0).unwrap();
    let fam = DrivenFamily::new(path.clone(), GeneratorKind::QubitBoson { gamma: 1.0 });
    let s = slow_integrals(&path, &fam, 9).unwrap();
    assert_eq!((s.sigma2, s.w_diss, s.q_w), (0.0, 0.0, 0.0));
}
