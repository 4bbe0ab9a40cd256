//! Versioned store of frozen constants.
//!
//! One entry per line, `family|method_pair|p|q|grid_id = value`; `#` starts a comment.
//! The first non-empty line must be the version header.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const FROZEN_HEADER: &str = "# hardy-amalgam frozen constants v1";
pub const FROZEN_FILE: &str = "constants.txt";
/// Overrides the directory holding [`FROZEN_FILE`].
pub const FROZEN_DIR_VAR: &str = "AMALGAM_FROZEN_DIR";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrozenKey {
    pub family: String,
    pub pair: String,
    pub p: String,
    pub q: String,
    pub grid_id: String,
}

impl FrozenKey {
    pub fn new(family: &str, pair: &str, e: crate::amalgam::Exponents, grid_id: &str) -> Self {
        Self {
            family: family.into(),
            pair: pair.into(),
            p: e.p().to_string(),
            q: e.q().to_string(),
            grid_id: grid_id.into(),
        }
    }

    fn render(&self) -> String {
        format!("{}|{}|{}|{}|{}", self.family, self.pair, self.p, self.q, self.grid_id)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrozenStore {
    entries: BTreeMap<FrozenKey, f64>,
}

impl FrozenStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: FrozenKey, value: f64) {
        self.entries.insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FrozenKey, &f64)> {
        self.entries.iter()
    }

    /// The constant for `key`. Entries recorded for the same family, pair and exponents on a
    /// different grid are an error: constants do not carry across grids.
    pub fn lookup(&self, key: &FrozenKey) -> Result<Option<f64>> {
        if let Some(v) = self.entries.get(key) {
            return Ok(Some(*v));
        }
        let other: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| k.family == key.family && k.pair == key.pair && k.p == key.p && k.q == key.q)
            .map(|k| k.grid_id.as_str())
            .collect();
        if other.is_empty() {
            Ok(None)
        } else {
            Err(Error::Frozen(format!(
                "constant {} exists only for grid(s) {}; refusing to compare across grids",
                key.render(),
                other.join(", ")
            )))
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some(h) if h == FROZEN_HEADER => {}
            other => {
                return Err(Error::Frozen(format!(
                    "missing or unknown version header: {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut store = Self::new();
        for line in lines {
            if line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Frozen(format!("malformed line `{line}`")))?;
            let parts: Vec<&str> = key.trim().split('|').collect();
            if parts.len() != 5 {
                return Err(Error::Frozen(format!("key `{}` needs 5 fields", key.trim())));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::Frozen(format!("value in `{line}`: {e}")))?;
            store.insert(
                FrozenKey {
                    family: parts[0].into(),
                    pair: parts[1].into(),
                    p: parts[2].into(),
                    q: parts[3].into(),
                    grid_id: parts[4].into(),
                },
                value,
            );
        }
        Ok(store)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(FROZEN_HEADER);
        out.push('\n');
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{} = {v:e}", k.render());
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Adds every entry of `other`, replacing equal keys.
    pub fn merge(&mut self, other: FrozenStore) {
        self.entries.extend(other.entries);
    }
}

/// `$AMALGAM_FROZEN_DIR/constants.txt`, else the store shipped at the repository root.
pub fn default_frozen_path() -> PathBuf {
    match std::env::var_os(FROZEN_DIR_VAR) {
        Some(dir) => PathBuf::from(dir).join(FROZEN_FILE),
        None => Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../frozen")
            .join(FROZEN_FILE),
    }
}
