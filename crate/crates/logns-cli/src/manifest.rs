//! Run manifests: one per run directory, written atomically at the end.
//! Aborted runs leave a `.failed` marker instead.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub struct Manifest {
    command: String,
    started_unix: u64,
    config_echo: String,
    summary: Vec<(String, String)>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Manifest {
    pub fn start(command: &str, config_echo: String) -> Self {
        Manifest {
            command: command.to_string(),
            started_unix: now_unix(),
            config_echo,
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: String) {
        self.summary.push((key.to_string(), value));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, logns::csv::fmt_f64(value));
    }

    pub fn push_bool(&mut self, key: &str, value: bool) {
        self.push(key, if value { "1" } else { "0" }.to_string());
    }

    /// Writes `manifest.txt` via a temporary file and rename.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut body = String::new();
        body.push_str(&format!("format_version = {FORMAT_VERSION}\n"));
        body.push_str(&format!("artifact = logns {}\n", env!("CARGO_PKG_VERSION")));
        body.push_str(&format!("command = {}\n", self.command));
        body.push_str(&format!("started_unix = {}\n", self.started_unix));
        body.push_str(&format!("ended_unix = {}\n", now_unix()));
        body.push_str(&self.config_echo);
        for (k, v) in &self.summary {
            body.push_str(&format!("summary.{k} = {v}\n"));
        }
        let tmp = dir.join("manifest.txt.tmp");
        let target = dir.join("manifest.txt");
        std::fs::write(&tmp, body).map_err(CliError::io)?;
        std::fs::rename(&tmp, &target).map_err(CliError::io)?;
        Ok(())
    }
}

/// Drops a `.failed` marker with the error text.
pub fn mark_failed(dir: &Path, err: &CliError) {
    let _ = std::fs::write(dir.join(".failed"), format!("{err}\n"));
}
