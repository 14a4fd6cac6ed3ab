//! Flat `key=value` configuration files and flag/file/default resolution.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys are the long flag names without dashes. Command-line flags
//! override the file, and the file overrides built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", n + 1)))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Config(format!("config line {}: empty key", n + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("config line {}: duplicate key {key}", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&crate::formats::read_text(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Resolves settings and records the effective value of each one.
#[derive(Debug, Default)]
pub struct Resolver {
    file: ConfigFile,
    used: Vec<String>,
    effective: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Self {
            file,
            ..Self::default()
        }
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.used.push(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("config value {key}={v} is not valid"))),
        }
    }

    /// Flag, else config file, else `default`.
    pub fn pick<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let file = self.file_value(key)?;
        let value = flag.or(file).unwrap_or(default);
        self.effective.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Like [`Resolver::pick`] with no default.
    pub fn pick_opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let file = self.file_value(key)?;
        let value = flag.or(file);
        if let Some(v) = &value {
            self.effective.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    /// Repeated flag, else a comma-separated config value.
    pub fn pick_list(&mut self, key: &str, flag: Vec<String>) -> Result<Vec<String>> {
        let file: Option<String> = self.file_value(key)?;
        let value = if flag.is_empty() {
            file.map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .unwrap_or_default()
        } else {
            flag
        };
        if !value.is_empty() {
            self.effective.push((key.to_string(), value.join(",")));
        }
        Ok(value)
    }

    /// Fails on config keys the command never asked for.
    pub fn check_unused(&self) -> Result<()> {
        for key in self.file.keys() {
            if !self.used.iter().any(|u| u == key) {
                return Err(CliError::Config(format!("unknown config key {key}")));
            }
        }
        Ok(())
    }

    /// Effective settings in the config-file syntax.
    pub fn render(&self) -> String {
        self.effective
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}
