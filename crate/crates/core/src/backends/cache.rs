//! Content-addressed response cache.
//!
//! The key is the SHA-256 of the backend id, the call kind and the full
//! request. Entries live at `<dir>/<k[..2]>/<k>.json` and are written
//! through a temp file + rename, so a crash never leaves a torn entry.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    BackendError, BackendResponse, GenerationRequest, Generator, TranslationRequest, Translator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheMode {
    /// Serve hits, call the backend on a miss and store the result.
    #[default]
    ReadWrite,
    /// Serve hits; a miss is an error and the backend is never called.
    Replay,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub remote_calls: u64,
    pub corrupt_entries: u64,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    backend_id: String,
    outputs: Vec<String>,
}

pub struct Cached<B> {
    inner: B,
    dir: PathBuf,
    mode: CacheMode,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    remote_calls: AtomicU64,
    corrupt: AtomicU64,
}

impl<B> Cached<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>, mode: CacheMode) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Cached {
            inner,
            dir,
            mode,
            key_locks: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            remote_calls: AtomicU64::new(0),
            corrupt: AtomicU64::new(0),
        })
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            remote_calls: self.remote_calls.load(Ordering::Relaxed),
            corrupt_entries: self.corrupt.load(Ordering::Relaxed),
        }
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.key_locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(key.to_string()).or_default().clone()
    }

    fn load(&self, key: &str, expected: usize) -> Option<Vec<String>> {
        let path = self.entry_path(key);
        let raw = match std::fs::read(&path) {
            Ok(r) => r,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache entry {} unreadable: {e}", path.display());
                self.corrupt.fetch_add(1, Ordering::Relaxed);
                return None;
            }
        };
        match serde_json::from_slice::<Entry>(&raw) {
            Ok(e) if e.key == key && e.outputs.len() == expected => Some(e.outputs),
            Ok(_) => {
                log::warn!("cache entry {} does not match its key; ignoring", path.display());
                self.corrupt.fetch_add(1, Ordering::Relaxed);
                None
            }
            Err(err) => {
                log::warn!("cache entry {} is corrupt ({err}); ignoring", path.display());
                self.corrupt.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn store(&self, key: &str, backend_id: &str, outputs: &[String]) -> Result<(), BackendError> {
        let entry = Entry {
            key: key.to_string(),
            backend_id: backend_id.to_string(),
            outputs: outputs.to_vec(),
        };
        let bytes = serde_json::to_vec(&entry).map_err(|e| BackendError::Cache(e.to_string()))?;
        crate::artifact::write_atomic(&self.entry_path(key), &bytes)
            .map_err(|e| BackendError::Cache(e.to_string()))
    }

    fn cached_call(
        &self,
        key: String,
        backend_id: String,
        expected: usize,
        call: impl FnOnce() -> Result<BackendResponse, BackendError>,
    ) -> Result<BackendResponse, BackendError> {
        let lock = self.key_lock(&key);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(outputs) = self.load(&key, expected) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(BackendResponse {
                outputs,
                latency: Duration::ZERO,
                backend_id,
            });
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        if self.mode == CacheMode::Replay {
            return Err(BackendError::CacheMiss { key });
        }
        self.remote_calls.fetch_add(1, Ordering::Relaxed);
        let resp = call()?;
        resp.check_cardinality(expected)?;
        self.store(&key, &backend_id, &resp.outputs)?;
        Ok(resp)
    }
}

/// Digest of (backend id, call kind, request).
pub fn cache_key<R: Serialize>(backend_id: &str, kind: &str, req: &R) -> String {
    let payload = serde_json::json!({
        "backend_id": backend_id,
        "kind": kind,
        "request": req,
    });
    let bytes = serde_json::to_vec(&payload).expect("requests serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl<B: Translator> Translator for Cached<B> {
    fn backend_id(&self) -> String {
        self.inner.backend_id()
    }

    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let id = self.inner.backend_id();
        let key = cache_key(&id, "translate", req);
        self.cached_call(key, id, req.texts.len(), || self.inner.translate(req))
    }
}

impl<B: Generator> Generator for Cached<B> {
    fn backend_id(&self) -> String {
        self.inner.backend_id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let id = self.inner.backend_id();
        let key = cache_key(&id, "generate", req);
        self.cached_call(key, id, req.inputs.len(), || self.inner.generate(req))
    }
}
