//! Two-point-measurement work distribution of a closed driven system.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfdr_core::exact::{tpm_distribution_global, weak_measurement_moments};
use qfdr_core::operator::log_partition_function;
use qfdr_core::protocol::ProtocolPath;
use qfdr_core::{pauli, CMatrix, Hermitian, C64};

use crate::config::Config;
use crate::error::CliResult;
use crate::table::ResultTable;

pub const KEYS: &[&str] = &["model", "d", "tau", "beta", "steps", "h0", "h1", "threshold", "seed"];

/// Hermitian part of a matrix with uniform entries in [−1, 1] + i[−1, 1],
/// scaled by 1/√d so the spectrum stays O(1).
fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Hermitian {
    let m = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let scale = 0.5 / (d as f64).sqrt();
    Hermitian::new((&m + m.adjoint()) * C64::new(scale, 0.0)).expect("symmetrised")
}

fn random_path(seed: u64, d: usize, tau: f64, beta: f64) -> CliResult<ProtocolPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_hermitian(&mut rng, d);
    let b = random_hermitian(&mut rng, d);
    let c = &random_hermitian(&mut rng, d) * 0.5;
    let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
    let pi = std::f64::consts::PI;
    Ok(ProtocolPath::from_unit_schedule(
        tau,
        beta,
        move |s| &(&(&a * (1.0 - s)) + &(&b * s)) + &(&c * (pi * s).sin()),
        Some(Arc::new(move |s| &(&b2 - &a2) + &(&c2 * (pi * (pi * s).cos())))),
    )?)
}

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let model = cfg.choice("model", "random", &["random", "qubit-quench", "identity"])?;
    let tau = cfg.positive("tau", 1.0)?;
    let beta = cfg.positive("beta", 1.0)?;
    let steps = cfg.count("steps", 32, 1)?;
    let threshold = cfg.real("threshold", 1e-14)?;
    let path = match model.as_str() {
        "random" => random_path(cfg.seed(0)?, cfg.count("d", 4, 1)?, tau, beta)?,
        "qubit-quench" => {
            let bloch = |v: [f64; 3]| pauli::bloch(v[0], v[1], v[2]);
            ProtocolPath::linear(bloch(cfg.vector3("h0", "0,0,1")?), bloch(cfg.vector3("h1", "1,0,0")?), tau, beta)?
        }
        _ => {
            // nondegenerate and static: U is diagonal, so no transitions
            let levels: Vec<f64> = (0..cfg.count("d", 4, 1)?).map(|k| k as f64).collect();
            ProtocolPath::constant(Hermitian::from_real_diagonal(&levels), tau, beta)?
        }
    };

    let dist = tpm_distribution_global(&path, steps)?;
    let rows = dist.significant(threshold);
    let mut table = ResultTable::new("oracle-tpm", &["w", "probability"]);
    for &(w, p) in &rows {
        table.push(vec![w.into(), p.into()]);
    }
    let ratio = (log_partition_function(path.end(), beta)? - log_partition_function(path.start(), beta)?).exp();
    let (m1, m2) = weak_measurement_moments(&path, None, steps)?;
    let kept: f64 = rows.iter().map(|r| r.1).sum();
    table.note("mean", dist.mean());
    table.note("second_moment", dist.moment(2));
    table.note("variance", dist.variance());
    table.note("jarzynski_defect", (dist.exponential_average(beta) - ratio).abs());
    table.note("weak_mean", m1);
    table.note("weak_second_moment", m2);
    table.note("weak_mean_diff", (m1 - dist.mean()).abs());
    table.note("weak_second_moment_diff", (m2 - dist.moment(2)).abs());
    table.note("dropped_probability", dist.total_probability() - kept);
    table.note("steps", dist.steps());
    Ok(table)
}
