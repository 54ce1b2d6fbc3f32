//! Flat `key = value` configuration with `TTCSW_*` environment overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "backend_url",
    "translator_url",
    "generator_url",
    "aligner_url",
    "auth_token",
    "timeout_secs",
    "retries",
    "max_batch",
    "seed",
    "cache_dir",
    "jobs",
    "data_dir",
    "source_lang",
];

const SECRET: &[&str] = &["auth_token"];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Read the optional config file, then apply environment overrides.
    pub fn load(file: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = file {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            s.parse_into(&raw, path)?;
        }
        for key in KEYS {
            if let Some(v) = env(&format!("TTCSW_{}", key.to_ascii_uppercase())) {
                s.values.insert(key.to_string(), v);
            }
        }
        Ok(s)
    }

    fn parse_into(&mut self, raw: &str, path: &Path) -> Result<(), CliError> {
        for (i, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1))
            })?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(CliError::Usage(format!("{}:{}: unknown key `{k}`", path.display(), i + 1)));
            }
            self.values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("{key} = {v}: {e}"))))
            .transpose()
    }

    /// Digest of every non-secret setting plus `extra` (the command and
    /// its arguments).
    pub fn digest(&self, extra: &str) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.values {
            if !SECRET.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n"));
            }
        }
        h.update(extra);
        hex::encode(h.finalize())[..16].to_string()
    }
}
