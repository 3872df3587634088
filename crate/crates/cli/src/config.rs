//! Key=value configuration files. Keys mirror the long flag names;
//! command-line flags always win over file entries.

use std::collections::BTreeMap;

/// Keys a configuration file may set. Anything else is rejected so that
/// a typo fails loudly instead of being silently ignored.
const KNOWN_KEYS: &[&str] = &[
    "li-variant",
    "scale-log",
    "normalize",
    "unknown-codes",
    "parallelism",
    "include-diagonal",
    "combos",
    "constant-cs",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Parse `key=value` lines; `#` starts a comment, blank lines are
/// ignored.
pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value", idx + 1));
        };
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!(
                "config line {}: unknown key {key:?} (expected one of {})",
                idx + 1,
                KNOWN_KEYS.join(", ")
            ));
        }
        if entries.insert(key.to_owned(), value.to_owned()).is_some() {
            return Err(format!("config line {}: duplicate key {key:?}", idx + 1));
        }
    }
    Ok(ConfigFile { entries })
}
