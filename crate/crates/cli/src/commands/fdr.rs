//! Exact master-equation statistics against the slow-driving predictions
//! for a driven qubit, swept over protocol durations.

use std::path::Path;
use std::sync::Arc;

use qfdr_core::exact::{evolve, exact_statistics};
use qfdr_core::lindblad::GeneratorKind;
use qfdr_core::models::{qubit_protocol_classical, qubit_protocol_quantum};
use qfdr_core::operator::gibbs_state;
use qfdr_core::protocol::{DrivenFamily, ProtocolPath};
use qfdr_core::quad::HermiteSpline;
use qfdr_core::slow::slow_integrals;
use qfdr_core::pauli;

use super::fitted_decay;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::table::ResultTable;

pub const KEYS: &[&str] = &[
    "protocol", "protocol_file", "taus", "beta", "gamma", "r0", "r1", "steps", "slow_grid", "seed",
];

const FIELD_FLOOR: f64 = 1e-6;

/// Bloch-vector path s ↦ (x, y, z) read from a whitespace table.
///
/// Each non-comment line holds `s x y z` with H(s) = xσx + yσy + zσz. The
/// first row must have s = 0, the last s = 1, and s must increase. The path
/// between rows is a cubic Hermite interpolant, so dH/ds is continuous.
#[derive(Debug, Clone)]
pub struct BlochTable {
    splines: [HermiteSpline; 3],
}

impl BlochTable {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let bad = |line: usize, msg: String| CliError::Validation(format!("{}:{line}: {msg}", origin.display()));
        let mut s = Vec::new();
        let mut comps: [Vec<f64>; 3] = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let vals: Vec<f64> = content
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| bad(i + 1, format!("cannot parse `{t}`: {e}"))))
                .collect::<CliResult<_>>()?;
            if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
                return Err(bad(i + 1, format!("expected four finite numbers `s x y z`, got `{content}`")));
            }
            if let Some(&prev) = s.last() {
                if vals[0] <= prev {
                    return Err(bad(i + 1, format!("s must increase strictly ({} after {prev})", vals[0])));
                }
            }
            s.push(vals[0]);
            for k in 0..3 {
                comps[k].push(vals[k + 1]);
            }
        }
        if s.len() < 2 {
            return Err(CliError::Validation(format!("{}: need at least two rows", origin.display())));
        }
        if s[0] != 0.0 || *s.last().expect("two rows") != 1.0 {
            return Err(CliError::Validation(format!("{}: s must run from 0 to 1", origin.display())));
        }
        let [x, y, z] = comps;
        let splines = [
            HermiteSpline::with_estimated_slopes(s.clone(), x)?,
            HermiteSpline::with_estimated_slopes(s.clone(), y)?,
            HermiteSpline::with_estimated_slopes(s, z)?,
        ];
        let table = Self { splines };
        for k in 0..=1000 {
            let s = k as f64 / 1000.0;
            let (v, _) = table.at(s);
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if r < FIELD_FLOOR {
                return Err(CliError::Validation(format!(
                    "{}: field magnitude {r:e} at s = {s} is below {FIELD_FLOOR:e}; the generator needs a gapped qubit",
                    origin.display()
                )));
            }
        }
        Ok(table)
    }

    /// (x, y, z) and d/ds at s.
    pub fn at(&self, s: f64) -> ([f64; 3], [f64; 3]) {
        let mut v = [0.0; 3];
        let mut d = [0.0; 3];
        for k in 0..3 {
            (v[k], d[k]) = self.splines[k].eval_with_derivative(s);
        }
        (v, d)
    }

    pub fn path(&self, tau: f64, beta: f64) -> CliResult<ProtocolPath> {
        let (a, b) = (self.clone(), self.clone());
        Ok(ProtocolPath::from_unit_schedule(
            tau,
            beta,
            move |s| {
                let (v, _) = a.at(s);
                pauli::bloch(v[0], v[1], v[2])
            },
            Some(Arc::new(move |s| {
                let (_, d) = b.at(s);
                pauli::bloch(d[0], d[1], d[2])
            })),
        )?)
    }
}

enum Protocol {
    Classical { r0: f64, r1: f64 },
    Quantum,
    Custom(BlochTable),
}

impl Protocol {
    fn family(&self, tau: f64, beta: f64, gamma: f64) -> CliResult<(ProtocolPath, DrivenFamily)> {
        let (path, family) = match self {
            Protocol::Classical { r0, r1 } => {
                let p = qubit_protocol_classical(*r0, *r1, tau, beta, gamma)?;
                (p.path()?, p.family()?)
            }
            Protocol::Quantum => {
                let p = qubit_protocol_quantum(tau, beta, gamma)?;
                (p.path()?, p.family()?)
            }
            Protocol::Custom(table) => {
                let path = table.path(tau, beta)?;
                let fam = DrivenFamily::new(path.clone(), GeneratorKind::QubitBoson { gamma });
                (path, fam)
            }
        };
        Ok((path, family))
    }
}

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let kind = cfg.choice("protocol", "quantum", &["classical", "quantum", "custom"])?;
    let mut taus = cfg.positive_reals("taus", "25,50,100,200")?;
    let beta = cfg.positive("beta", 1.0)?;
    let gamma = cfg.positive("gamma", 1.0)?;
    let steps = cfg.count("steps", 1500, 2)?;
    let slow_grid = cfg.count("slow_grid", 65, 5)?;
    let protocol = match kind.as_str() {
        "classical" => Protocol::Classical {
            r0: cfg.positive("r0", 0.1)?,
            r1: cfg.positive("r1", 1.0)?,
        },
        "quantum" => Protocol::Quantum,
        _ => {
            let path = cfg
                .path("protocol_file")
                .ok_or_else(|| CliError::Validation("field `protocol_file`: required when protocol = custom".into()))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("field `protocol_file`: cannot read {}: {e}", path.display())))?;
            Protocol::Custom(BlochTable::parse(&text, &path)?)
        }
    };
    taus.sort_by(f64::total_cmp);
    if let Some(w) = taus.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Validation(format!("field `taus`: duplicate duration {}", w[0])));
    }

    let mut table = ResultTable::new(
        "fdr-verify",
        &["tau", "wdiss_exact", "half_beta_var_exact", "wdiss_slow", "half_beta_var_slow", "q_w_slow"],
    );
    let mut resid_w = Vec::new();
    let mut resid_v = Vec::new();
    let mut violations = Vec::new();
    let mut unconverged = Vec::new();
    let mut last = None;
    for &tau in &taus {
        let (path, family) = protocol.family(tau, beta, gamma)?;
        let slow = slow_integrals(&path, &family, slow_grid)?;
        if !slow.converged {
            unconverged.push(tau);
        }
        let rho0 = gibbs_state(path.start(), beta)?;
        let traj = evolve(&family, &rho0, tau, steps)?;
        let exact = exact_statistics(&traj, &path)?;
        let (hv_exact, hv_slow) = (0.5 * beta * exact.sigma2, 0.5 * beta * slow.sigma2);
        log::info!("τ = {tau}: W_diss exact {:.6e}, slow {:.6e}", exact.w_diss, slow.w_diss);
        if exact.w_diss > hv_exact {
            violations.push(tau);
        }
        last = Some((hv_exact - exact.w_diss, slow.q_w));
        resid_w.push((tau, exact.w_diss - slow.w_diss));
        resid_v.push((tau, hv_exact - hv_slow));
        table.push(vec![
            tau.into(),
            exact.w_diss.into(),
            hv_exact.into(),
            slow.w_diss.into(),
            hv_slow.into(),
            slow.q_w.into(),
        ]);
    }
    table.note("protocol", kind);
    if taus.len() >= 2 {
        table.note("wdiss_residual_exponent", fitted_decay(&resid_w));
        table.note("half_beta_var_residual_exponent", fitted_decay(&resid_v));
    }
    if let Some((gap, q_w)) = last {
        table.note("exact_gap_at_largest_tau", gap);
        table.note("q_w_slow_at_largest_tau", q_w);
    }
    table.note("fdr_violations_tau", serde_json::json!(violations));
    table.note("slow_unconverged_tau", serde_json::json!(unconverged));
    Ok(table)
}
