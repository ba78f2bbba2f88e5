//! One module per experiment; each reads its keys from a [`Config`] and
//! returns a [`ResultTable`].

pub mod fdr;
pub mod geodesic;
pub mod oracle;
pub mod oscillator;
pub mod pareto;
pub mod quench;

use crate::config::Config;
use crate::error::CliResult;
use crate::table::ResultTable;

/// Experiment name, runner and accepted keys.
pub type Runner = fn(&Config) -> CliResult<ResultTable>;

pub fn lookup(name: &str) -> Option<Runner> {
    Some(match name {
        "fdr-verify" => fdr::run,
        "oscillator-metrics" => oscillator::run,
        "geodesic" => geodesic::run,
        "pareto" => pareto::run,
        "quench" => quench::run,
        "oracle-tpm" => oracle::run,
        _ => return None,
    })
}

/// Decay exponent p of |r(τ)| ∝ τ^(−p) by least squares in log–log.
/// NaN when any residual vanishes.
pub fn fitted_decay(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(t, r)| (t.ln(), r.abs().ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    -sxy / sxx
}
