//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique;
//! a repeated key is a parse error so that typos in long files surface.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KvConfig {
    path: PathBuf,
    entries: Vec<(usize, String, String)>,
}

impl KvConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(&path, line_no, format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(&path, line_no, "empty key"));
            }
            if entries.iter().any(|(_, k, _)| *k == key) {
                return Err(Error::parse(&path, line_no, format!("duplicate key `{key}`")));
            }
            entries.push((line_no, key, value.trim().to_string()));
        }
        Ok(Self { path, entries })
    }

    /// Builds a config from already-split `(line, key, value)` entries.
    pub fn from_entries(path: impl Into<PathBuf>, entries: Vec<(usize, String, String)>) -> Result<Self> {
        let path = path.into();
        for (i, (line, key, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(_, k, _)| k == key) {
                return Err(Error::parse(&path, *line, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, k, _)| k.as_str())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some((line, _, value)) = self.entries.iter().find(|(_, k, _)| k == key) else {
            return Ok(None);
        };
        value
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::parse(&self.path, *line, format!("invalid value `{value}` for `{key}`")))
    }

    /// Rejects keys outside `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        for (line, key, _) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(Error::parse(&self.path, *line, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}
