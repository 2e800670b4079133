//! Line-oriented `key = value` run configuration.
//!
//! `#` starts a comment, blank lines are skipped, keys may appear once.
//! Every key must be consumed by the command that loads the file;
//! leftovers are a validation error, so typos never pass silently.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct RunConfig {
    values: BTreeMap<String, String>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!(
                    "config line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::validation(format!(
                    "config line {}: empty key or value",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::validation(format!(
                    "config key {key:?} given more than once"
                )));
            }
        }
        Ok(RunConfig {
            values,
            consumed: std::cell::RefCell::new(Vec::new()),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    fn take(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key)?;
        self.consumed.borrow_mut().push(key.to_string());
        Some(v.as_str())
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        self.take(key).map(|s| s.to_string())
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(s) => s.parse::<f64>().map(Some).map_err(|_| {
                CliError::validation(format!(
                    "config key {key:?}: cannot parse {s:?} as a number"
                ))
            }),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?
            .ok_or_else(|| CliError::validation(format!("missing config key {key:?}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(s) => s.parse::<usize>().map(Some).map_err(|_| {
                CliError::validation(format!(
                    "config key {key:?}: cannot parse {s:?} as an integer"
                ))
            }),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.opt_usize(key)?
            .ok_or_else(|| CliError::validation(format!("missing config key {key:?}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(s) => s.parse::<u64>().map_err(|_| {
                CliError::validation(format!("config key {key:?}: cannot parse {s:?} as a seed"))
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(s) => Err(CliError::validation(format!(
                "config key {key:?}: cannot parse {s:?} as a boolean"
            ))),
        }
    }

    /// Target squared mass from either `theta` or `theta_sq` (exactly one).
    pub fn theta_sq(&self) -> Result<f64, CliError> {
        let t = self.opt_f64("theta")?;
        let t2 = self.opt_f64("theta_sq")?;
        match (t, t2) {
            (Some(t), None) => {
                if t > 0.0 {
                    Ok(t * t)
                } else {
                    Err(CliError::validation(format!(
                        "theta must be positive, got {t}"
                    )))
                }
            }
            (None, Some(t2)) => {
                if t2 > 0.0 {
                    Ok(t2)
                } else {
                    Err(CliError::validation(format!(
                        "theta_sq must be positive, got {t2}"
                    )))
                }
            }
            (None, None) => Err(CliError::validation("missing `theta` or `theta_sq`".into())),
            (Some(_), Some(_)) => Err(CliError::validation(
                "give `theta` or `theta_sq`, not both".into(),
            )),
        }
    }

    /// Errors out if any configured key was never consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let consumed = self.consumed.borrow();
        let unknown: Vec<_> = self
            .values
            .keys()
            .filter(|k| !consumed.iter().any(|c| c == *k))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::validation(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )))
        }
    }

    /// Sorted echo of every key for the manifest.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "config.{k} = {v}");
        }
        out
    }
}

/// Output directory resolution: flag beats config beats `LOGNS_OUT`
/// beats the current directory.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = cfg.opt_str("out") {
        return PathBuf::from(p);
    }
    if let Ok(p) = std::env::var("LOGNS_OUT") {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    PathBuf::from(".")
}
