//! Flat `key = value` text configs used for channel-code tables and gate settings.
//!
//! Blank lines and lines starting with `#` are ignored. Keys keep file order.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("key {key:?}: cannot parse {value:?}")]
    Value { key: String, value: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(String),
}

/// Parsed flat config: ordered `(key, value)` entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlatConfig {
    entries: Vec<(String, String)>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            }
            if entries.iter().any(|(e, _)| e == k) {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                key: key.to_string(),
                value: v.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_order() {
        let c = FlatConfig::parse("# hi\n\nb = 2\na=x y\n").unwrap();
        let keys: Vec<_> = c.entries().map(|(k, _)| k).collect();
        assert_eq!(keys, ["b", "a"]);
        assert_eq!(c.get("a"), Some("x y"));
        assert_eq!(c.parse_value::<i32>("b").unwrap(), Some(2));
        assert!(c.parse_value::<i32>("a").is_err());
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(matches!(
            FlatConfig::parse("a=1\na=2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            FlatConfig::parse("nonsense"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }
}
