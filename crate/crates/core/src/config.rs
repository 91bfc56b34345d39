//! Plain-text run configuration: `key = value` lines grouped under
//! `[section]` headers, `#` comments.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", no + 1)))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            let sec = sections.entry(current.clone()).or_default();
            if sec.insert(key.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", no + 1)));
            }
        }
        Ok(Self { sections })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Set `key` in `section`, replacing any value from the file.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value.into());
    }

    /// Keys of `section` checked against `allowed`; keys outside any section
    /// are treated as part of every section.
    pub fn section(&self, name: &str, allowed: &[&str]) -> Result<Section> {
        let mut values = self.sections.get("").cloned().unwrap_or_default();
        if let Some(s) = self.sections.get(name) {
            values.extend(s.clone());
        }
        for other in self.sections.keys() {
            if !other.is_empty() && other != name {
                return Err(Error::Config(format!("unexpected section [{other}] for `{name}`")));
            }
        }
        if let Some(k) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}` in [{name}]")));
        }
        Ok(Section { name: name.to_string(), values })
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    name: String,
    values: BTreeMap<String, String>,
}

impl Section {
    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("[{}] `{key}`: cannot parse `{v}`", self.name))),
        }
    }

    pub fn str(&self, key: &str, default: &str) -> String {
        self.values.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Comma-separated numbers.
    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("[{}] `{key}`: cannot parse `{s}`", self.name)))
                })
                .collect(),
        }
    }
}
