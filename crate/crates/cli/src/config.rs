//! Flat `key = value` settings with precedence flags > config file > defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// A setting a subcommand understands, with its default (if any).
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: Some(default),
        help,
    }
}

pub const fn optional(name: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: None,
        help,
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// The config file could not be read.
    Unreadable(String),
    /// Bad syntax, unknown key or unparsable value.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Unreadable(m) | ConfigError::Invalid(m) => f.write_str(m),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("config line {}: expected key = value", number + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Invalid(format!("config line {}: empty key", number + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Unreadable(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolved settings of one run.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Layers defaults, then the file, then the flags; file keys outside `keys` are rejected.
    pub fn resolve(
        keys: &[Key],
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for k in keys {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        for (k, v) in file {
            if !keys.iter().any(|known| known.name == k) {
                return Err(ConfigError::Invalid(format!("unknown config key `{k}`")));
            }
            values.insert(k.clone(), v.clone());
        }
        for (k, v) in flags {
            values.insert(k.clone(), v.clone());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn get<T: FromStr>(&self, name: &str) -> Result<T, ConfigError> {
        let raw = self
            .raw(name)
            .ok_or_else(|| ConfigError::Invalid(format!("missing value for `{name}`")))?;
        raw.parse()
            .map_err(|_| ConfigError::Invalid(format!("cannot parse `{name}` = `{raw}`")))
    }

    pub fn get_opt<T: FromStr>(&self, name: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(name) {
            None => Ok(None),
            Some(_) => self.get(name).map(Some),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, name: &str) -> Result<Vec<T>, ConfigError> {
        let raw = self
            .raw(name)
            .ok_or_else(|| ConfigError::Invalid(format!("missing value for `{name}`")))?;
        raw.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|_| ConfigError::Invalid(format!("cannot parse item `{}` of `{name}`", item.trim())))
            })
            .collect()
    }

    /// Canonical `key=value` lines in key order, used for the run id.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[Key] = &[key("alpha", "1.5", ""), key("D", "2", ""), optional("T", "")];

    #[test]
    fn precedence_is_flags_then_file_then_defaults() {
        let file = parse_config("# comment\nalpha = 2.5\n\nD=3 # trailing\n").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("D".to_string(), "4".to_string());
        let s = Settings::resolve(KEYS, &file, &flags).unwrap();
        assert_eq!(s.get::<f64>("alpha").unwrap(), 2.5);
        assert_eq!(s.get::<usize>("D").unwrap(), 4);
        assert_eq!(s.get_opt::<f64>("T").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let file = parse_config("beta = 1").unwrap();
        assert!(Settings::resolve(KEYS, &file, &BTreeMap::new()).is_err());
        assert!(parse_config("no equals sign").is_err());
    }

    #[test]
    fn lists_and_canonical_form() {
        let file = parse_config("alpha = 1, 2 ,3").unwrap();
        let s = Settings::resolve(KEYS, &file, &BTreeMap::new()).unwrap();
        assert_eq!(s.list::<f64>("alpha").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.canonical(), "D=2\nalpha=1, 2 ,3\n");
    }
}
