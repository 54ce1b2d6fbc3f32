//! Inference services behind one request/response surface: translation,
//! triplet generation and term alignment.
//!
//! Every call is checked for positional integrity: a response carries
//! exactly one output per input, in input order.

mod cache;
mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cache::{CacheMode, CacheStats, Cached};
pub use http::{HttpBackend, HttpConfig};
pub use mock::{
    load_fixture_table, DictionaryTranslator, EchoGenerator, FixtureGenerator, FixtureTranslator,
    IdentityTranslator,
};

use crate::corpus::Lang;

/// Separator between the sentence and the query term of an alignment input.
pub const SEP: &str = "<SEP>";
/// Alignment output meaning "no counterpart in this sentence".
pub const NONE_LABEL: &str = "None";

/// `sentence <SEP> term`.
pub fn alignment_input(sentence: &str, term: &str) -> String {
    format!("{sentence} {SEP} {term}")
}

/// Split an alignment input at its last separator.
pub fn split_alignment_input(input: &str) -> Option<(&str, &str)> {
    input
        .rsplit_once(SEP)
        .map(|(s, t)| (s.trim(), t.trim()))
}

/// Whether an aligner output means "no alignment".
pub fn is_none_label(output: &str) -> bool {
    let o = output.trim();
    o.is_empty() || o == NONE_LABEL
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("request violates contract: {0}")]
    Precondition(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("backend returned {got} outputs for {expected} inputs")]
    Cardinality { expected: usize, got: usize },
    #[error("replay mode: no cached response for key {key}")]
    CacheMiss { key: String },
    #[error("cache i/o: {0}")]
    Cache(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub texts: Vec<String>,
    pub source_lang: Lang,
    pub target_lang: Lang,
    pub preserve_tags: bool,
}

impl TranslationRequest {
    pub fn new(texts: Vec<String>, source_lang: Lang, target_lang: Lang, preserve_tags: bool) -> Self {
        TranslationRequest {
            texts,
            source_lang,
            target_lang,
            preserve_tags,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.texts.is_empty() {
            return Err(BackendError::Precondition("empty texts list".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Aste,
    Align,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub inputs: Vec<String>,
    pub task: Task,
    pub target_lang_hint: Option<Lang>,
}

impl GenerationRequest {
    pub fn new(inputs: Vec<String>, task: Task, target_lang_hint: Option<Lang>) -> Self {
        GenerationRequest {
            inputs,
            task,
            target_lang_hint,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.inputs.is_empty() {
            return Err(BackendError::Precondition("empty inputs list".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendResponse {
    pub outputs: Vec<String>,
    pub latency: Duration,
    pub backend_id: String,
}

impl BackendResponse {
    pub fn check_cardinality(&self, expected: usize) -> Result<(), BackendError> {
        if self.outputs.len() != expected {
            return Err(BackendError::Cardinality {
                expected,
                got: self.outputs.len(),
            });
        }
        Ok(())
    }
}

pub trait Translator: Send + Sync {
    fn backend_id(&self) -> String;
    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError>;
}

/// Structural generation and alignment prediction.
pub trait Generator: Send + Sync {
    fn backend_id(&self) -> String;
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError>;
}

impl<T: Translator + ?Sized> Translator for &T {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        (**self).translate(req)
    }
}

impl<T: Translator + ?Sized> Translator for Box<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        (**self).translate(req)
    }
}

impl<T: Generator + ?Sized> Generator for &T {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        (**self).generate(req)
    }
}

impl<T: Generator + ?Sized> Generator for Box<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        (**self).generate(req)
    }
}

impl<T: Translator + ?Sized> Translator for std::sync::Arc<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        (**self).translate(req)
    }
}

impl<T: Generator + ?Sized> Generator for std::sync::Arc<T> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        (**self).generate(req)
    }
}

/// Translate with precondition and cardinality checks.
pub fn translate_checked<T: Translator + ?Sized>(
    backend: &T,
    req: &TranslationRequest,
) -> Result<Vec<String>, BackendError> {
    req.validate()?;
    let resp = backend.translate(req)?;
    resp.check_cardinality(req.texts.len())?;
    Ok(resp.outputs)
}

/// Generate with precondition and cardinality checks.
pub fn generate_checked<G: Generator + ?Sized>(
    backend: &G,
    req: &GenerationRequest,
) -> Result<Vec<String>, BackendError> {
    req.validate()?;
    let resp = backend.generate(req)?;
    resp.check_cardinality(req.inputs.len())?;
    Ok(resp.outputs)
}

/// Translate an arbitrary number of texts in batches of at most
/// `batch_size`, concatenating outputs in input order. An empty input
/// yields an empty output without calling the backend.
pub fn translate_batched<T: Translator + ?Sized>(
    backend: &T,
    texts: &[String],
    source_lang: &Lang,
    target_lang: &Lang,
    preserve_tags: bool,
    batch_size: usize,
) -> Result<Vec<String>, BackendError> {
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(batch_size.max(1)) {
        let req = TranslationRequest::new(
            chunk.to_vec(),
            source_lang.clone(),
            target_lang.clone(),
            preserve_tags,
        );
        out.extend(translate_checked(backend, &req)?);
    }
    Ok(out)
}

/// Generation counterpart of [`translate_batched`].
pub fn generate_batched<G: Generator + ?Sized>(
    backend: &G,
    inputs: &[String],
    task: Task,
    target_lang_hint: Option<&Lang>,
    batch_size: usize,
) -> Result<Vec<String>, BackendError> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(batch_size.max(1)) {
        let req = GenerationRequest::new(chunk.to_vec(), task, target_lang_hint.cloned());
        out.extend(generate_checked(backend, &req)?);
    }
    Ok(out)
}

pub const DEFAULT_MAX_BATCH: usize = 16;
