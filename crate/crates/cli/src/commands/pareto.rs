//! Fluctuation/dissipation fronts swept over temperature.

use qfdr_core::geometry::{alpha_grid, pareto_front, LinearChart, MetricSource, ParetoFront};
use qfdr_core::lindblad::GeneratorKind;
use qfdr_core::models::OscillatorMetric;
use qfdr_core::{pauli, Hermitian};

use crate::config::Config;
use crate::error::CliResult;
use crate::table::ResultTable;

pub const KEYS: &[&str] = &[
    "betas", "omega0", "omega_tau", "gamma", "tau", "n_alpha", "grid", "chart", "seed",
];

fn front<M: MetricSource>(source: &M, ends: (f64, f64), tau: f64, alphas: &[f64], grid: usize) -> CliResult<ParetoFront> {
    Ok(pareto_front(source, ends, tau, alphas, grid)?)
}

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let mut betas = cfg.positive_reals("betas", "2,1,0.7,0.6,0.5,0.4,0.3")?;
    let ends = (cfg.positive("omega0", 0.1)?, cfg.positive("omega_tau", 10.0)?);
    let gamma = cfg.positive("gamma", 1.0)?;
    let tau = cfg.positive("tau", 1.0)?;
    let alphas = alpha_grid(cfg.count("n_alpha", 41, 1)?)?;
    let grid = cfg.count("grid", 2048, 2)?;
    let chart = cfg.choice("chart", "oscillator", &["oscillator", "commuting"])?;
    // hottest last, so distances shrink down the table
    betas.sort_by(|a, b| b.total_cmp(a));
    betas.dedup();

    let mut table = ResultTable::new("pareto", &["beta", "alpha", "sigma_tilde2", "wdiss"]);
    let mut distances = Vec::new();
    let mut defects = Vec::new();
    let mut failures = Vec::new();
    for &beta in &betas {
        let f = match chart.as_str() {
            "oscillator" => front(&OscillatorMetric::new(beta, gamma)?, ends, tau, &alphas, grid)?,
            _ => {
                // H = λσz with a perfect thermalizer: every control commutes
                let c = LinearChart::new(Hermitian::zeros(2), vec![pauli::sz()], beta, GeneratorKind::Thermalizer { rate: gamma })?;
                front(&c, ends, tau, &alphas, grid)?
            }
        };
        for p in &f.points {
            table.push(vec![beta.into(), p.alpha.into(), p.sigma_tilde2.into(), p.w_diss.into()]);
        }
        for (a, why) in &f.failures {
            failures.push(format!("beta={beta} alpha={a}: {why}"));
        }
        distances.push(f.distance_to_diagonal());
        defects.push(f.monotonicity_defect());
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    table.note("distance_to_diagonal", serde_json::json!(distances));
    table.note("distance_decreases_with_temperature", decreasing);
    table.note("max_monotonicity_defect", defects.iter().copied().fold(0.0, f64::max));
    table.note("failed_alphas", serde_json::json!(failures));
    Ok(table)
}
