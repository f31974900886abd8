//! Versioned TOML run configuration.
//!
//! ```toml
//! version = 1
//!
//! [ppo]
//! lr = 0.003
//! total_episodes = 2000
//!
//! [env]
//! episode_length = 60
//!
//! [corpus]
//! n_base = 500
//!
//! [init]
//! leaf_concentration = 0.9
//! ```
//!
//! Every section is optional and may set any subset of its fields; the rest
//! keep their defaults. Command-line flags override the file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const CONFIG_VERSION: i64 = 1;

const SECTIONS: [&str; 4] = ["ppo", "env", "corpus", "init"];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse()?;
        match table.get("version").and_then(toml::Value::as_integer) {
            Some(CONFIG_VERSION) => {}
            Some(v) => bail!("config version {v} is not supported (expected {CONFIG_VERSION})"),
            None => bail!("config needs `version = {CONFIG_VERSION}`"),
        }
        for key in table.keys() {
            if key != "version" && !SECTIONS.contains(&key.as_str()) {
                bail!("unknown config section `{key}`");
            }
        }
        Ok(Self { table })
    }

    /// `defaults` with the named section laid over it.
    pub fn section<T: Serialize + DeserializeOwned>(&self, name: &str, defaults: T) -> Result<T> {
        let Some(section) = self.table.get(name) else { return Ok(defaults) };
        let section = section.as_table().with_context(|| format!("`{name}` must be a table"))?;
        let mut base = serde_json::to_value(&defaults)?;
        let obj = base.as_object_mut().expect("config sections serialize as objects");
        for (k, v) in section {
            obj.insert(k.clone(), serde_json::to_value(v)?);
        }
        serde_json::from_value(base).with_context(|| format!("invalid `[{name}]` section"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use treepolicy::rl::PpoConfig;

    #[test]
    fn overlays_partial_sections() {
        let cfg = ConfigFile::parse("version = 1\n[ppo]\nlr = 0.01\nepochs = 2\n").unwrap();
        let ppo = cfg.section("ppo", PpoConfig::default()).unwrap();
        assert_eq!((ppo.lr, ppo.epochs, ppo.gamma), (0.01, 2, 0.99));
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let cfg = ConfigFile::parse("version = 1\n[ppo]\nlearning_rate = 0.01\n").unwrap();
        assert!(cfg.section("ppo", PpoConfig::default()).is_err());
        assert!(ConfigFile::parse("version = 2\n").is_err());
        assert!(ConfigFile::parse("[ppo]\n").is_err());
        assert!(ConfigFile::parse("version = 1\n[train]\n").is_err());
    }
}
