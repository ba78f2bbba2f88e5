//! Result tables: CSV with a `#` metadata header and a JSON sidecar.
//!
//! The CSV body (everything after the header block) depends only on the
//! resolved parameters, so reruns reproduce it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // shortest round-trip representation
            Cell::Real(v) => format!("{v:e}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub experiment: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar findings echoed in the CSV header and the sidecar.
    pub summary: Map<String, Value>,
}

impl ResultTable {
    pub fn new(experiment: &'static str, columns: &[&'static str]) -> Self {
        Self {
            experiment,
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Column count consistent and every numeric cell finite.
    pub fn validate(&self) -> CliResult<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(CliError::Validation(format!(
                    "{}: row {i} has {} cells for {} columns",
                    self.experiment,
                    row.len(),
                    self.columns.len()
                )));
            }
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Real(v) = cell {
                    if !v.is_finite() {
                        return Err(CliError::Numerical {
                            kind: "non_finite",
                            message: format!("{}: column `{}` row {i} is {v}", self.experiment, self.columns[c]),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Run metadata that is not part of the CSV body.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub parameters: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

impl RunInfo {
    /// SHA-256 over the experiment name and the sorted resolved parameters.
    pub fn config_hash(&self, experiment: &str) -> String {
        let mut h = Sha256::new();
        h.update(experiment.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.parameters {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`.
pub fn write_outputs(dir: &Path, table: &ResultTable, info: &RunInfo) -> CliResult<(PathBuf, PathBuf)> {
    table.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let hash = info.config_hash(table.experiment);
    let mut header = String::new();
    let _ = writeln!(header, "# qfdr {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(header, "# experiment: {}", table.experiment);
    let _ = writeln!(header, "# config_sha256: {hash}");
    let _ = writeln!(header, "# wall_time_s: {:.3}", info.wall_time_s);
    for (k, v) in &info.parameters {
        let _ = writeln!(header, "# param {k} = {v}");
    }
    for (k, v) in &table.summary {
        let _ = writeln!(header, "# summary {k} = {}", render_value(v));
    }
    let csv_path = dir.join(format!("{}.csv", table.experiment));
    let json_path = dir.join(format!("{}.json", table.experiment));
    std::fs::write(&csv_path, header + &table.body())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let sidecar = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": table.experiment,
        "config_sha256": hash,
        "wall_time_s": info.wall_time_s,
        "parameters": info.parameters,
        "columns": table.columns,
        "rows": table.rows.len(),
        "summary": table.summary,
    });
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&json_path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", json_path.display())))?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_is_plain_csv() {
        let mut t = ResultTable::new("demo", &["N", "x"]);
        t.push(vec![8usize.into(), 0.125.into()]);
        t.push(vec![16usize.into(), 1e-20.into()]);
        assert_eq!(t.body(), "N,x\n8,1.25e-1\n16,1e-20\n");
        t.validate().unwrap();
        t.push(vec![32usize.into(), f64::NAN.into()]);
        assert!(matches!(t.validate(), Err(CliError::Numerical { .. })));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = ResultTable::new("demo", &["a", "b"]);
        t.push(vec![1.0.into()]);
        assert!(matches!(t.validate(), Err(CliError::Validation(_))));
    }

    #[test]
    fn hash_depends_on_parameters_only() {
        let mut p = BTreeMap::new();
        p.insert("beta".to_string(), "1".to_string());
        let a = RunInfo {
            parameters: p.clone(),
            wall_time_s: 1.0,
        };
        let b = RunInfo {
            parameters: p.clone(),
            wall_time_s: 7.0,
        };
        assert_eq!(a.config_hash("x"), b.config_hash("x"));
        assert_ne!(a.config_hash("x"), a.config_hash("y"));
        p.insert("beta".to_string(), "2".to_string());
        let c = RunInfo {
            parameters: p,
            wall_time_s: 1.0,
        };
        assert_ne!(a.config_hash("x"), c.config_hash("x"));
        assert_eq!(a.config_hash("x").len(), 64);
    }
}
