//! Key=value configuration files mirroring the long command-line options,
//! and the flag/config/default resolution order.

use std::fs;
use std::path::{Path, PathBuf};

/// Parsed `key=value` file. Blank lines and lines starting with `#` are
/// ignored; keys must be unique and are validated against the option names
/// of the active subcommand.
#[derive(Debug)]
pub struct ConfigFile {
    path: PathBuf,
    entries: Vec<(usize, String, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("config {}: {e}", path.display()))?;
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{lineno}: expected key=value, got '{line}'",
                    path.display()
                ));
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key.is_empty() {
                return Err(format!("{}:{lineno}: empty key", path.display()));
            }
            if let Some((first, _, _)) = entries.iter().find(|(_, k, _)| *k == key) {
                return Err(format!(
                    "{}:{lineno}: key '{key}' already set on line {first}",
                    path.display()
                ));
            }
            entries.push((lineno, key, value));
        }
        Ok(Self { path: path.to_path_buf(), entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Value and line number stored under `key`.
    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, value)| (*line, value.as_str()))
    }

    /// Rejects keys that are not long options of the active subcommand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        for (line, key, _) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(format!(
                    "{}:{line}: unknown key '{key}' (expected one of: {})",
                    self.path.display(),
                    allowed.join(", ")
                ));
            }
        }
        Ok(())
    }
}

/// Command-line value if present, else the config value under `key` parsed
/// with `parse`, else `None`. Config parse failures carry file and line.
pub fn resolve_typed<T>(
    cfg: Option<&ConfigFile>,
    flag: Option<T>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    from_config(cfg, key, parse)
}

/// Like [`resolve_typed`] for options clap keeps as raw strings (compound
/// formats): the flag string goes through the same parser, attributed to
/// `--key`.
pub fn resolve_parsed<T>(
    cfg: Option<&ConfigFile>,
    flag: Option<&str>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, String> {
    match flag {
        Some(raw) => parse(raw).map(Some).map_err(|e| format!("--{key}: {e}")),
        None => from_config(cfg, key, parse),
    }
}

fn from_config<T>(
    cfg: Option<&ConfigFile>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, String> {
    match cfg.and_then(|c| c.get(key).map(|hit| (c, hit))) {
        Some((c, (line, raw))) => parse(raw)
            .map(Some)
            .map_err(|e| format!("{}:{line}: {key}: {e}", c.path().display())),
        None => Ok(None),
    }
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing required {what}"))
}
