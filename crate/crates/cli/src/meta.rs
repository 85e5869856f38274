//! Plain `key=value` text files, used for metadata next to matrix files and
//! for CLI config files. Blank lines and lines starting with `#` are skipped;
//! `[section]` headers are accepted and ignored so TOML-style tables work.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get_str(key)
            .ok_or_else(|| Error::Format(format!("missing key `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::Format(format!("bad value `{raw}` for key `{key}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected key=value", lineno + 1))
            })?;
            let value = value.trim().trim_matches('"');
            kv.set(key.trim(), value);
        }
        Ok(kv)
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let kv = KeyValues::parse("# comment\n[system]\nn = 4\nname=\"fig1\"\n\nsigma_w=0.1\n").unwrap();
        assert_eq!(kv.get::<usize>("n").unwrap(), 4);
        assert_eq!(kv.get_str("name"), Some("fig1"));
        assert_eq!(kv.get::<f64>("sigma_w").unwrap(), 0.1);
        assert!(kv.get::<usize>("missing").is_err());
        assert!(kv.get::<usize>("name").is_err());
        assert_eq!(KeyValues::parse(&kv.render()).unwrap(), kv);
        assert!(KeyValues::parse("novalue").is_err());
    }
}
