//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! Values come from an optional file, then `--set key=value` overrides in
//! order. Every command declares the keys it understands; anything else is
//! rejected before work starts.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn parse_line(line: &str, origin: &str) -> Result<Option<(String, String)>, CliError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let (key, value) = trimmed
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("{origin}: expected key=value, got `{trimmed}`")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Validation(format!("{origin}: empty key")));
    }
    Ok(Some((key.to_string(), value.trim().to_string())))
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            if let Some((k, v)) = parse_line(line, &format!("{source}:{}", i + 1))? {
                cfg.values.insert(k, v);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        match parse_line(assignment, "--set")? {
            Some((k, v)) => {
                self.values.insert(k, v);
                Ok(())
            }
            None => Err(CliError::Validation(format!("--set expects key=value, got `{assignment}`"))),
        }
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, command: &str, allowed: &[&str]) -> Result<(), CliError> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                let mut known = allowed.to_vec();
                known.sort_unstable();
                return Err(CliError::Validation(format!(
                    "unknown key `{key}` for `{command}`; known keys: {}",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Validation(format!("{key} = `{v}`: {e}"))),
        }
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Validation(format!("{key} = `{v}`: {e}")))
            })
            .transpose()
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>, CliError>
    where
        T: Clone,
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|e| CliError::Validation(format!("{key}: `{s}`: {e}")))
                })
                .collect(),
        }
    }
}
