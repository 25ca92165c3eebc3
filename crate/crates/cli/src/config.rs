use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};
use crate::suites::CHECKS;

/// Keys a config file may set; `threshold.<metric>` is accepted on top for
/// every metric that carries a check.
pub const KEYS: &[&str] = &[
    "suite", "eps", "nodes", "quad", "eps_list", "samples", "seed", "n_x", "n_t", "delta", "horizon", "eta", "iters", "example",
];

/// Parsed `key = value` file. Blank lines and `#` comments are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    thresholds: BTreeMap<String, f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(metric) = key.strip_prefix("threshold.") {
                if !CHECKS.iter().any(|c| c.metric == metric) {
                    return Err(CliError::Config(format!("line {}: no check on metric `{metric}`", no + 1)));
                }
                let v = value.parse().map_err(|_| CliError::Config(format!("line {}: `{key}` is not a number", no + 1)))?;
                cfg.thresholds.insert(metric.to_string(), v);
            } else if KEYS.contains(&key) {
                if cfg.values.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(CliError::Config(format!("line {}: `{key}` set twice", no + 1)));
                }
            } else {
                return Err(CliError::Config(format!("line {}: unknown key `{key}`", no + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{s}`"))))
                    .collect()
            })
            .transpose()
    }

    pub fn threshold(&self, metric: &str) -> Option<f64> {
        self.thresholds.get(metric).copied()
    }

    /// Flag, else config, else default.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }
}
