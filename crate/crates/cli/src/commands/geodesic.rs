//! Optimal oscillator frequency schedule for one α.

use qfdr_core::models::OscillatorModel;

use crate::config::Config;
use crate::error::CliResult;
use crate::table::ResultTable;

pub const KEYS: &[&str] = &["omega0", "omega_tau", "beta", "gamma", "tau", "alpha", "grid", "samples", "seed"];

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let model = OscillatorModel::new(
        cfg.positive("omega0", 0.1)?,
        cfg.positive("omega_tau", 10.0)?,
        cfg.positive("beta", 1.0)?,
        cfg.positive("gamma", 1.0)?,
    )?;
    let tau = cfg.positive("tau", 1.0)?;
    let alpha = cfg.unit_interval("alpha", 0.5)?;
    let grid = cfg.count("grid", 1024, 2)?;
    let samples = cfg.count("samples", 201, 2)?;

    let sol = model.geodesic(alpha, tau, grid)?;
    let mut table = ResultTable::new("geodesic", &["t", "omega", "velocity"]);
    for (t, w, v) in sol.sample(samples) {
        table.push(vec![t.into(), w.into(), v.into()]);
    }
    table.note("cost", sol.cost);
    table.note("length", sol.length);
    table.note("sigma_tilde2", sol.sigma_tilde2);
    table.note("wdiss", sol.w_diss);
    table.note("implicit_equation_residual", model.implicit_equation_residual(&sol)?);
    Ok(table)
}
