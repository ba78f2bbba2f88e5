//! Strong-coupling quench chains of increasing length for a qubit coupled
//! to a qubit bath.

use qfdr_core::models::{quench_continuum_check, QuenchSequence};
use qfdr_core::{pauli, Hermitian};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::table::ResultTable;

pub const KEYS: &[&str] = &["h0", "h1", "bath", "interaction", "coupling", "beta", "ns", "seed"];

fn interaction(kind: &str) -> Option<Hermitian> {
    let (x, y, z) = (pauli::sx(), pauli::sy(), pauli::sz());
    Some(match kind {
        "xx" => x.kron(&x),
        "yy" => y.kron(&y),
        "zz" => z.kron(&z),
        "zx" => z.kron(&x),
        "heisenberg" => &(&x.kron(&x) + &y.kron(&y)) + &z.kron(&z),
        _ => return None,
    })
}

pub fn run(cfg: &Config) -> CliResult<ResultTable> {
    cfg.check_keys(KEYS)?;
    let bloch = |v: [f64; 3]| pauli::bloch(v[0], v[1], v[2]);
    let h0 = bloch(cfg.vector3("h0", "1,0,1")?);
    let h1 = bloch(cfg.vector3("h1", "1,0,0")?);
    let bath = bloch(cfg.vector3("bath", "0,0,1")?);
    let kind = cfg.choice("interaction", "xx", &["xx", "yy", "zz", "zx", "heisenberg"])?;
    let v = interaction(&kind).expect("validated choice");
    let coupling = cfg.real("coupling", 0.5)?;
    let beta = cfg.positive("beta", 1.0)?;
    let mut ns = cfg.counts("ns", "8,16,32,64", 2)?;
    ns.sort_unstable();
    if let Some(w) = ns.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Validation(format!("field `ns`: duplicate chain length {}", w[0])));
    }

    let seq = QuenchSequence::linear(h0, h1, bath, v, coupling, beta, ns[0])?;
    let report = quench_continuum_check(&seq, &ns)?;
    let mut table = ResultTable::new("quench", &["N", "wdiss", "half_beta_var", "q_w_pred", "residual"]);
    for r in &report.rows {
        table.push(vec![r.n.into(), r.wdiss.into(), r.half_beta_var.into(), r.q_w_pred.into(), r.residual.into()]);
    }
    let ratios: Vec<_> = report.halving_ratios().iter().map(|(n, r)| serde_json::json!({"n": n, "ratio": r})).collect();
    let violations: Vec<usize> = report.rows.iter().filter(|r| r.wdiss > r.half_beta_var).map(|r| r.n).collect();
    table.note("halving_ratios", serde_json::json!(ratios));
    table.note("continuum_skew", report.continuum.skew);
    table.note("continuum_dissipation", report.continuum.dissipation);
    if ns.len() >= 2 {
        table.note("gap_residual_coefficient", report.gap_coefficient());
        table.note("gap_residual_exponent", report.gap_exponent());
        table.note("residual_exponent", report.residual_exponent());
    }
    table.note("fdr_violations_n", serde_json::json!(violations));
    Ok(table)
}
