//! Line-oriented `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are skipped.
//! Keys are dotted lowercase paths. Duplicate keys are rejected so a
//! config never silently depends on declaration order.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed assignments, sorted by key.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            if !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '.' || c == '_')
            {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("key `{key}` has characters outside [a-z0-9._]"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("key `{key}` has an empty value"),
                });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }
}

// ─── tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let raw = RawConfig::parse(
            "# header\n\nexperiment = sweep\ngeometry.kind = pp  # inline\n",
        )
        .unwrap();
        assert_eq!(raw.get("experiment"), Some("sweep"));
        assert_eq!(raw.get("geometry.kind"), Some("pp"));
        assert_eq!(raw.keys().count(), 2);
    }

    #[test]
    fn rejects_duplicates() {
        let err = RawConfig::parse("seed = 1\nseed = 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate key `seed`"));
    }

    #[test]
    fn rejects_missing_equals() {
        let err = RawConfig::parse("experiment sweep\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn rejects_bad_key_characters() {
        assert!(RawConfig::parse("Geometry.Kind = pp\n").is_err());
        assert!(RawConfig::parse("geometry kind = pp\n").is_err());
    }

    #[test]
    fn rejects_empty_value() {
        assert!(RawConfig::parse("seed =\n").is_err());
    }
}
