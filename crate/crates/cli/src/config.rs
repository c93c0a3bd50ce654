//! `key = value` configuration files and flag/file/default resolution.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys are case-insensitive and treat `-` and `_` alike.
fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value, got '{line}'", no + 1))?;
            let key = normalize(k);
            if key.is_empty() {
                bail!("line {}: empty key", no + 1);
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("line {}: duplicate key '{key}'", no + 1);
            }
        }
        Ok(Self {
            entries,
            used: RefCell::default(),
        })
    }

    fn lookup<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let key = normalize(key);
        let Some(raw) = self.entries.get(&key) else {
            return Ok(None);
        };
        self.used.borrow_mut().insert(key.clone());
        raw.parse::<T>()
            .map(Some)
            .map_err(|e| anyhow!("config key '{key}': cannot parse '{raw}': {e}"))
    }

    /// Flag if given, else the file value, else nothing.
    pub fn opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.lookup(key)?;
        Ok(flag.or(file))
    }

    /// Flag if given, else the file value, else `default`.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    /// Fails on keys that no resolver asked for.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if !unknown.is_empty() {
            bail!("unknown config keys: {}", unknown.join(", "));
        }
        Ok(())
    }
}
