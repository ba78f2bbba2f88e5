//! Oscillator metrics over an inverse-temperature sweep, closed form against
//! the truncated Fock-space maps.

use rayon::prelude::*;

use qfdr_core::models::{OscillatorMetric, OscillatorModel};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::table::{Cell, ResultTable};

pub const KEYS: &[&str] = &["omega", "gamma", "betas", "beta_min", "beta_max", "n_beta", "numeric", "seed"];

pub fn betas(cfg: &Config) -> CliResult<Vec<f64>> {
    if cfg.contains("betas") {
        for key in ["beta_min", "beta_max", "n_beta"] {
            if cfg.contains(key) {
                return Err(CliError::Validation(format!("`betas` and `{key}` are mutually exclusive")));
            }
        }
        let mut b = cfg.positive_reals("betas", "1")?;
        b.sort_by(f64::total_cmp);
        b.dedup();
        return Ok(b);
    }
    let lo = cfg.positive("beta_min", 0.1)?;
    let hi = cfg.positive("beta_max", 10.0)?;
    let n = cfg.count("n_beta", 30, 1)?;
    if hi < lo {
        return Err(CliError::Validation(format!("field `beta_max`: {hi} is below beta_min = {lo}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln();
    Ok((0..n).map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp()).collect())
}

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let omega = cfg.positive("omega", 1.0)?;
    let gamma = cfg.positive("gamma", 1.0)?;
    let numeric = cfg.flag("numeric", true)?;
    let betas = betas(cfg)?;

    let rows: Vec<CliResult<Vec<Cell>>> = betas
        .par_iter()
        .map(|&beta| {
            let (l, x) = OscillatorMetric::new(beta, gamma)?.evaluate(omega)?;
            let mut row: Vec<Cell> = vec![beta.into(), l.into(), x.into(), (l - x).into()];
            if numeric {
                let m = OscillatorModel::new(omega, omega, beta, gamma)?.metrics_numeric(omega)?;
                row.extend::<[Cell; 5]>([
                    m.lambda.into(),
                    m.xi.into(),
                    ((m.lambda - l) / l).abs().into(),
                    ((m.xi - x) / x).abs().into(),
                    m.dim.into(),
                ]);
            }
            Ok(row)
        })
        .collect();

    let mut columns = vec!["beta", "Lambda", "xi", "Lambda_minus_xi"];
    if numeric {
        columns.extend(["Lambda_numeric", "xi_numeric", "Lambda_rel_err", "xi_rel_err", "truncation"]);
    }
    let mut table = ResultTable::new("oscillator-metrics", &columns);
    let mut worst = 0.0f64;
    for row in rows {
        let row = row?;
        if numeric {
            for c in &row[6..8] {
                if let Cell::Real(v) = c {
                    worst = worst.max(*v);
                }
            }
        }
        table.push(row);
    }
    if numeric {
        table.note("max_rel_err", worst);
    }
    Ok(table)
}
