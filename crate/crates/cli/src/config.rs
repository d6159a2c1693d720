//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! [run]
//! model = qg2d
//! alpha = 0.5
//! [initial]
//! seed = 7
//! ```
//!
//! Keys are addressed as `section.key`; keys before any section header
//! live in the empty section and are addressed by their bare name.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Input(format!("line {line_no}: unterminated section header")))?
                    .trim();
                if name.is_empty() || name.contains(['.', '[', ']']) {
                    return Err(CliError::Input(format!("line {line_no}: bad section name '{name}'")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("line {line_no}: expected 'key = value', got '{line}'")))?;
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(CliError::Input(format!("line {line_no}: bad key '{k}'")));
            }
            let full = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            if entries.insert(full.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(CliError::Input(format!("line {line_no}: duplicate key '{full}'")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fails on the first key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> CliResult<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            Some((k, (_, line))) => Err(CliError::Input(format!("unknown config key '{k}' (line {line})"))),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Input(format!("bad value '{v}' for config key '{key}' (line {line})"))),
        }
    }

    pub fn get_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => parse_list(v)
                .map(Some)
                .map_err(|_| CliError::Input(format!("bad list '{v}' for config key '{key}' (line {line})"))),
        }
    }
}

/// Comma-separated floats; empty input is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect()
}
