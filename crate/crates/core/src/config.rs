//! Runtime configuration: a TOML file with environment overrides.
//!
//! ```toml
//! uri = "sqlite:///var/lib/app.db"
//! ssdb = "search.db"
//! port = 8080
//! unmapped_keyword = "scan"
//! interp_cap = 8
//! max_hops = 3
//! query_timeout_secs = 30
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::catalog::DEFAULT_MAX_HOPS;
use crate::error::{Error, Result};

/// What to do with a keyword that neither the schema nor the value index
/// can place.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnmappedKeywordPolicy {
    /// Fail the query with a message naming the keyword.
    #[default]
    Reject,
    /// Scan every type-compatible column and add hits to the index.
    Scan,
}

impl UnmappedKeywordPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            UnmappedKeywordPolicy::Reject => "reject",
            UnmappedKeywordPolicy::Scan => "scan",
        }
    }

    pub fn parse(s: &str) -> Option<UnmappedKeywordPolicy> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reject" => Some(UnmappedKeywordPolicy::Reject),
            "scan" => Some(UnmappedKeywordPolicy::Scan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Application database descriptor. When absent, the one recorded at
    /// registration is used.
    pub uri: Option<String>,
    pub ssdb: PathBuf,
    pub bind: String,
    pub port: u16,
    pub unmapped_keyword: UnmappedKeywordPolicy,
    pub interp_cap: usize,
    pub max_hops: usize,
    pub query_timeout_secs: u64,
    pub default_limit: usize,
    pub max_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            uri: None,
            ssdb: PathBuf::from("kwsearch.db"),
            bind: "127.0.0.1".into(),
            port: 8080,
            unmapped_keyword: UnmappedKeywordPolicy::Reject,
            interp_cap: 8,
            max_hops: DEFAULT_MAX_HOPS,
            query_timeout_secs: 30,
            default_limit: 100,
            max_limit: 1000,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()
    }

    /// Read a config file, resolving a relative `ssdb` path against the
    /// file's directory, then apply environment overrides.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Config::parse(&text)?;
        if config.ssdb.is_relative() {
            if let Some(dir) = path.parent() {
                config.ssdb = dir.join(&config.ssdb);
            }
        }
        config.apply_env(|k| std::env::var(k).ok())
    }

    /// Apply `KWSEARCH_*` overrides from the given lookup.
    pub fn apply_env(mut self, var: impl Fn(&str) -> Option<String>) -> Result<Config> {
        fn num<T: std::str::FromStr>(name: &str, v: String) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{name}: not a number: `{v}`")))
        }
        if let Some(v) = var("KWSEARCH_URI") {
            self.uri = Some(v);
        }
        if let Some(v) = var("KWSEARCH_SSDB") {
            self.ssdb = PathBuf::from(v);
        }
        if let Some(v) = var("KWSEARCH_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("KWSEARCH_PORT") {
            self.port = num("KWSEARCH_PORT", v)?;
        }
        if let Some(v) = var("KWSEARCH_UNMAPPED_KEYWORD") {
            self.unmapped_keyword = UnmappedKeywordPolicy::parse(&v).ok_or_else(|| {
                Error::Config(format!("KWSEARCH_UNMAPPED_KEYWORD: expected reject or scan, got `{v}`"))
            })?;
        }
        if let Some(v) = var("KWSEARCH_INTERP_CAP") {
            self.interp_cap = num("KWSEARCH_INTERP_CAP", v)?;
        }
        if let Some(v) = var("KWSEARCH_MAX_HOPS") {
            self.max_hops = num("KWSEARCH_MAX_HOPS", v)?;
        }
        if let Some(v) = var("KWSEARCH_QUERY_TIMEOUT_SECS") {
            self.query_timeout_secs = num("KWSEARCH_QUERY_TIMEOUT_SECS", v)?;
        }
        self.validate()
    }

    fn validate(self) -> Result<Config> {
        if self.interp_cap == 0 {
            return Err(Error::Config("interp_cap must be at least 1".into()));
        }
        if self.max_hops == 0 {
            return Err(Error::Config("max_hops must be at least 1".into()));
        }
        if self.default_limit == 0 || self.max_limit < self.default_limit {
            return Err(Error::Config("need 1 <= default_limit <= max_limit".into()));
        }
        Ok(self)
    }

    pub fn query_timeout(&self) -> Option<Duration> {
        (self.query_timeout_secs > 0).then(|| Duration::from_secs(self.query_timeout_secs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_env_overrides() {
        let c = Config::parse("ssdb = 's.db'\nunmapped_keyword = 'scan'\nport = 9000").unwrap();
        assert_eq!(c.unmapped_keyword, UnmappedKeywordPolicy::Scan);
        assert_eq!(c.port, 9000);
        assert_eq!(c.interp_cap, 8);
        let c = c
            .apply_env(|k| match k {
                "KWSEARCH_PORT" => Some("9100".into()),
                "KWSEARCH_UNMAPPED_KEYWORD" => Some("Reject".into()),
                "KWSEARCH_MAX_HOPS" => Some("2".into()),
                _ => None,
            })
            .unwrap();
        assert_eq!(c.port, 9100);
        assert_eq!(c.unmapped_keyword, UnmappedKeywordPolicy::Reject);
        assert_eq!(c.max_hops, 2);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(Config::parse("interp_cap = 0").is_err());
        assert!(Config::parse("colour = 'blue'").is_err());
        assert!(Config::default()
            .apply_env(|k| (k == "KWSEARCH_PORT").then(|| "http".into()))
            .is_err());
    }
}
