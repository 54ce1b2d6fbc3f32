//! Backend construction from command-line specs.
//!
//! A spec is one of `http://…`/`https://…`, `identity`, `echo`, `none`,
//! `fixture:<path>` (a fixture table) or `dict:<path>` (a bilingual
//! lexicon, translator only).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use sha2::{Digest, Sha256};
use ttcsw::backends::{
    load_fixture_table, CacheMode, CacheStats, Cached, DictionaryTranslator, EchoGenerator, FixtureGenerator,
    FixtureTranslator, Generator, HttpBackend, HttpConfig, IdentityTranslator, Translator,
};
use ttcsw::lexicon::Lexicon;

use crate::config::Settings;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Translator,
    Generator,
    Aligner,
}

impl Role {
    fn key(self) -> &'static str {
        match self {
            Role::Translator => "translator_url",
            Role::Generator => "generator_url",
            Role::Aligner => "aligner_url",
        }
    }

    fn flag(self) -> &'static str {
        match self {
            Role::Translator => "--translator",
            Role::Generator => "--generator",
            Role::Aligner => "--aligner",
        }
    }
}

type Probe = Box<dyn Fn() -> (String, CacheStats)>;

pub struct Backends<'a> {
    settings: &'a Settings,
    cache: Option<(PathBuf, CacheMode)>,
    probes: Vec<Probe>,
}

impl<'a> Backends<'a> {
    pub fn new(settings: &'a Settings, replay: bool) -> Result<Self, CliError> {
        let cache = match settings.get("cache_dir") {
            Some(d) => Some((
                PathBuf::from(d),
                if replay { CacheMode::Replay } else { CacheMode::ReadWrite },
            )),
            None if replay => return Err(CliError::Usage("--replay needs --cache-dir".into())),
            None => None,
        };
        Ok(Backends {
            settings,
            cache,
            probes: Vec::new(),
        })
    }

    fn spec(&self, role: Role, explicit: Option<&str>) -> Result<String, CliError> {
        explicit
            .or_else(|| self.settings.get(role.key()))
            .or_else(|| self.settings.get("backend_url"))
            .map(str::to_string)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "no backend for {}: pass {} or set {} / backend_url",
                    role.key().trim_end_matches("_url"),
                    role.flag(),
                    role.key()
                ))
            })
    }

    fn http(&self, url: &str) -> Result<HttpBackend, CliError> {
        let mut cfg = HttpConfig::new(url);
        cfg.auth_token = self.settings.get("auth_token").map(str::to_string);
        if let Some(t) = self.settings.parse::<f64>("timeout_secs")? {
            cfg.timeout = Duration::from_secs_f64(t);
        }
        if let Some(r) = self.settings.parse::<u32>("retries")? {
            cfg.retries = r;
        }
        if let Some(b) = self.settings.parse::<usize>("max_batch")? {
            cfg.max_batch = b.max(1);
        }
        Ok(HttpBackend::new(cfg))
    }

    fn cached<B>(&mut self, inner: B, dir: &Path, mode: CacheMode) -> Result<Arc<Cached<B>>, CliError>
    where
        B: 'static,
        Cached<B>: CacheProbe,
    {
        let c = Arc::new(Cached::new(inner, dir, mode).map_err(|e| ttcsw::Error::io(dir, e))?);
        let probe = Arc::clone(&c);
        self.probes.push(Box::new(move || probe.probe()));
        Ok(c)
    }

    pub fn translator(&mut self, explicit: Option<&str>) -> Result<Arc<dyn Translator>, CliError> {
        let spec = self.spec(Role::Translator, explicit)?;
        let inner: Box<dyn Translator> = if is_http(&spec) {
            Box::new(self.http(&spec)?)
        } else if spec == "identity" {
            Box::new(IdentityTranslator)
        } else if let Some(p) = spec.strip_prefix("fixture:") {
            let p = Path::new(p);
            Box::new(FixtureTranslator::from_entries(file_id(p)?, &load_fixture_table(p)?))
        } else if let Some(p) = spec.strip_prefix("dict:") {
            Box::new(DictionaryTranslator::new(Lexicon::load(Path::new(p))?))
        } else {
            return Err(CliError::Usage(format!("unknown translator `{spec}`")));
        };
        Ok(match self.cache.clone() {
            None => Arc::from(inner),
            Some((dir, mode)) => self.cached(inner, &dir, mode)?,
        })
    }

    pub fn generator(&mut self, role: Role, explicit: Option<&str>) -> Result<Arc<dyn Generator>, CliError> {
        let spec = self.spec(role, explicit)?;
        let inner: Box<dyn Generator> = if is_http(&spec) {
            Box::new(self.http(&spec)?)
        } else if spec == "echo" {
            Box::new(EchoGenerator)
        } else if spec == "none" {
            Box::new(FixtureGenerator::new("none"))
        } else if let Some(p) = spec.strip_prefix("fixture:") {
            let p = Path::new(p);
            Box::new(FixtureGenerator::from_entries(file_id(p)?, &load_fixture_table(p)?))
        } else {
            return Err(CliError::Usage(format!("unknown {} `{spec}`", role.flag().trim_start_matches('-'))));
        };
        Ok(match self.cache.clone() {
            None => Arc::from(inner),
            Some((dir, mode)) => self.cached(inner, &dir, mode)?,
        })
    }

    /// One line per cached backend on stderr.
    pub fn report(&self) {
        for p in &self.probes {
            let (id, s) = p();
            eprintln!(
                "cache {id}: hits={} misses={} remote_calls={} corrupt_entries={}",
                s.hits, s.misses, s.remote_calls, s.corrupt_entries
            );
        }
    }
}

pub trait CacheProbe {
    fn probe(&self) -> (String, CacheStats);
}

impl CacheProbe for Cached<Box<dyn Translator>> {
    fn probe(&self) -> (String, CacheStats) {
        (self.inner().backend_id(), self.stats())
    }
}

impl CacheProbe for Cached<Box<dyn Generator>> {
    fn probe(&self) -> (String, CacheStats) {
        (self.inner().backend_id(), self.stats())
    }
}

fn is_http(spec: &str) -> bool {
    spec.starts_with("http://") || spec.starts_with("https://")
}

/// File name plus a content hash, so cache keys change with the table.
fn file_id(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| ttcsw::Error::io(path, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(format!("{name}@{}", &hex::encode(Sha256::digest(&bytes))[..12]))
}
