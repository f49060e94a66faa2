//! Flat `key = value` run files. Keys are the long flag names without the
//! leading dashes; `#` starts a comment.

use std::path::Path;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    /// The entry as `--key value` arguments.
    pub fn to_args(&self) -> [String; 2] {
        [format!("--{}", self.key), self.value.clone()]
    }
}

pub fn parse(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| LabError::Config { path: path.to_path_buf(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err("empty key or value".into()));
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        entries.push(Entry { line: i + 1, key: key.to_string(), value: value.to_string() });
    }
    Ok(entries)
}

pub fn load(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse(&text, path)
}
