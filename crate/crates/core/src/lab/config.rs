//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! gate = not
//! a = 4
//! b = 4
//! cp = true
//! eps = 0:0.1:11
//! delta_mhz = 2
//! tau_us = 0.1
//! steps = 20000
//! out = sweep.csv
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique and
//! limited to the ones above.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const KEYS: [&str; 9] = ["gate", "a", "b", "cp", "eps", "delta_mhz", "tau_us", "steps", "out"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(format!("invalid value '{v}' for '{key}'"))),
        }
    }
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::config(format!("line {}: unknown key '{k}'", n + 1)));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::config(format!("line {}: duplicate key '{k}'", n + 1)));
            }
        }
        Ok(ConfigFile { values })
    }
}
