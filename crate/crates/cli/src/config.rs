//! Flat `key = value` configuration with flag overrides.
//!
//! Blank lines and `#` comments are ignored. Later sources win: built-in
//! defaults, then the config file, then `--set key=value` flags. Every value
//! read is recorded so the resolved parameter set can be hashed and echoed.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => write!(f, "--set"),
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Config {
    /// Parses `text` as if read from `path`.
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("{}:{line}: expected `key = value`, found `{content}`", path.display()))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(CliError::Validation(format!("{}:{line}: invalid key `{key}`", path.display())));
            }
            if let Some(prev) = cfg.entries.get(key) {
                return Err(CliError::Validation(format!(
                    "{}:{line}: duplicate key `{key}` (first set at {})",
                    path.display(),
                    prev.origin
                )));
            }
            cfg.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    origin: Origin::File {
                        path: path.to_path_buf(),
                        line,
                    },
                },
            );
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got `{assignment}`")))?;
        let key = key.trim();
        if !valid_key(key) {
            return Err(CliError::Validation(format!("--set: invalid key `{key}`")));
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                origin: Origin::Flag,
            },
        );
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Rejects keys the experiment does not know.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for (key, entry) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Validation(format!(
                    "{}: unknown key `{key}`; expected one of: {}",
                    entry.origin,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn invalid(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.entries.get(key) {
            Some(e) => CliError::Validation(format!("{}: field `{key}`: {msg}", e.origin)),
            None => CliError::Validation(format!("field `{key}`: {msg}")),
        }
    }

    fn raw(&self, key: &str, default: &str) -> String {
        let v = self.entries.get(key).map_or(default, |e| e.value.as_str()).to_string();
        self.resolved.borrow_mut().insert(key.to_string(), v.clone());
        v
    }

    fn parsed<T: FromStr>(&self, key: &str, text: &str) -> CliResult<T>
    where
        T::Err: fmt::Display,
    {
        text.parse::<T>().map_err(|e| self.invalid(key, format!("cannot parse `{text}`: {e}")))
    }

    pub fn choice(&self, key: &str, default: &str, options: &[&str]) -> CliResult<String> {
        let v = self.raw(key, default);
        if options.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(self.invalid(key, format!("`{v}` is not one of {}", options.join(", "))))
        }
    }

    pub fn real(&self, key: &str, default: f64) -> CliResult<f64> {
        let v: f64 = self.parsed(key, &self.raw(key, &default.to_string()))?;
        if !v.is_finite() {
            return Err(self.invalid(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.real(key, default)?;
        if v <= 0.0 {
            return Err(self.invalid(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    pub fn unit_interval(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.real(key, default)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(self.invalid(key, format!("must lie in [0, 1], got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize, min: usize) -> CliResult<usize> {
        let v: usize = self.parsed(key, &self.raw(key, &default.to_string()))?;
        if v < min {
            return Err(self.invalid(key, format!("must be ≥ {min}, got {v}")));
        }
        Ok(v)
    }

    pub fn seed(&self, default: u64) -> CliResult<u64> {
        self.parsed("seed", &self.raw("seed", &default.to_string()))
    }

    pub fn flag(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.raw(key, if default { "true" } else { "false" }).as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(self.invalid(key, format!("expected true/false, got `{other}`"))),
        }
    }

    /// Comma-separated reals.
    pub fn reals(&self, key: &str, default: &str) -> CliResult<Vec<f64>> {
        let text = self.raw(key, default);
        let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(self.invalid(key, "list must not be empty"));
        }
        items
            .iter()
            .map(|s| {
                let v: f64 = self.parsed(key, s)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.invalid(key, format!("entry `{s}` must be finite")))
                }
            })
            .collect()
    }

    pub fn positive_reals(&self, key: &str, default: &str) -> CliResult<Vec<f64>> {
        let v = self.reals(key, default)?;
        if let Some(bad) = v.iter().find(|&&x| x <= 0.0) {
            return Err(self.invalid(key, format!("entries must be > 0, got {bad}")));
        }
        Ok(v)
    }

    pub fn counts(&self, key: &str, default: &str, min: usize) -> CliResult<Vec<usize>> {
        let text = self.raw(key, default);
        let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(self.invalid(key, "list must not be empty"));
        }
        items
            .iter()
            .map(|s| {
                let v: usize = self.parsed(key, s)?;
                if v < min {
                    Err(self.invalid(key, format!("entries must be ≥ {min}, got {v}")))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Exactly three comma-separated reals.
    pub fn vector3(&self, key: &str, default: &str) -> CliResult<[f64; 3]> {
        let v = self.reals(key, default)?;
        <[f64; 3]>::try_from(v.as_slice()).map_err(|_| self.invalid(key, format!("expected 3 components, got {}", v.len())))
    }

    /// Every value read so far, defaults included.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    /// Path-valued key, resolved relative to the config file that set it.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let entry = self.entries.get(key)?;
        self.resolved.borrow_mut().insert(key.to_string(), entry.value.clone());
        let p = PathBuf::from(&entry.value);
        match &entry.origin {
            Origin::File { path, .. } if p.is_relative() => {
                Some(path.parent().map_or(p.clone(), |dir| dir.join(&p)))
            }
            _ => Some(p),
        }
    }
}
