//! JSON-over-HTTP client for the model service.
//!
//! ```text
//! POST /v1/translate {"texts":[..],"source_lang":"en","target_lang":"es","preserve_tags":true}
//!                 -> {"translations":[..]}
//! POST /v1/generate  {"inputs":[..],"task":"aste"|"align","target_lang_hint":"es"|null}
//!                 -> {"outputs":[..]}
//! GET  /health       -> {"status":"ok","model_id":".."}
//! ```
//!
//! 200 is success, 422 a malformed request and 503 an unavailable model.
//! Connection failures, timeouts and 5xx/429 answers are retried with
//! exponential backoff.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    BackendError, BackendResponse, GenerationRequest, Generator, TranslationRequest, Translator,
    DEFAULT_MAX_BATCH,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub base_url: String,
    pub auth_token: Option<String>,
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub backoff: Duration,
    pub max_batch: usize,
    /// Identity used in cache keys; defaults to `http:<base_url>`.
    pub backend_id: Option<String>,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpConfig {
            base_url: base_url.into(),
            auth_token: None,
            timeout: Duration::from_secs(60),
            retries: 3,
            backoff: Duration::from_millis(500),
            max_batch: DEFAULT_MAX_BATCH,
            backend_id: None,
        }
    }
}

#[derive(Serialize)]
struct TranslateBody<'a> {
    texts: &'a [String],
    source_lang: &'a str,
    target_lang: &'a str,
    preserve_tags: bool,
}

#[derive(Deserialize)]
struct TranslateReply {
    translations: Vec<String>,
}

#[derive(Serialize)]
struct GenerateBody<'a> {
    inputs: &'a [String],
    task: super::Task,
    target_lang_hint: Option<&'a str>,
}

#[derive(Deserialize)]
struct GenerateReply {
    outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    #[serde(default)]
    pub model_id: String,
}

pub struct HttpBackend {
    cfg: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: HttpConfig) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build();
        HttpBackend {
            agent: ureq::Agent::new_with_config(config),
            cfg,
        }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.cfg
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path)
    }

    pub fn health(&self) -> Result<Health, BackendError> {
        let body = self.with_retries(|| {
            let mut req = self.agent.get(&self.url("/health"));
            if let Some(tok) = &self.cfg.auth_token {
                req = req.header("Authorization", &format!("Bearer {tok}"));
            }
            classify(req.call())
        })?;
        serde_json::from_str(&body).map_err(|e| BackendError::Protocol(format!("/health: {e}")))
    }

    fn post(&self, path: &str, body: String) -> Result<String, BackendError> {
        self.with_retries(|| {
            let mut req = self
                .agent
                .post(&self.url(path))
                .header("Content-Type", "application/json");
            if let Some(tok) = &self.cfg.auth_token {
                req = req.header("Authorization", &format!("Bearer {tok}"));
            }
            classify(req.send(body.as_str()))
        })
    }

    fn with_retries(
        &self,
        mut call: impl FnMut() -> Result<String, Attempt>,
    ) -> Result<String, BackendError> {
        let mut delay = self.cfg.backoff;
        let mut attempts = 0;
        loop {
            attempts += 1;
            match call() {
                Ok(body) => return Ok(body),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    if attempts > self.cfg.retries {
                        return Err(BackendError::Transport {
                            attempts,
                            message: msg,
                        });
                    }
                    log::warn!("{}: attempt {attempts} failed ({msg}), retrying", self.cfg.base_url);
                    std::thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                }
            }
        }
    }
}

enum Attempt {
    Retry(String),
    Fatal(BackendError),
}

fn classify(
    res: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
) -> Result<String, Attempt> {
    let mut resp = match res {
        Ok(r) => r,
        Err(e) => return Err(Attempt::Retry(e.to_string())),
    };
    let status = resp.status().as_u16();
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| Attempt::Retry(format!("reading body: {e}")))?;
    match status {
        200 => Ok(body),
        422 => Err(Attempt::Fatal(BackendError::Precondition(format!(
            "server rejected request: {body}"
        )))),
        429 | 500..=599 => Err(Attempt::Retry(format!("HTTP {status}: {body}"))),
        _ => Err(Attempt::Fatal(BackendError::Protocol(format!(
            "unexpected HTTP {status}: {body}"
        )))),
    }
}

impl Translator for HttpBackend {
    fn backend_id(&self) -> String {
        self.cfg
            .backend_id
            .clone()
            .unwrap_or_else(|| format!("http:{}", self.cfg.base_url))
    }

    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let start = Instant::now();
        let mut outputs = Vec::with_capacity(req.texts.len());
        for chunk in req.texts.chunks(self.cfg.max_batch.max(1)) {
            let body = serde_json::to_string(&TranslateBody {
                texts: chunk,
                source_lang: req.source_lang.as_str(),
                target_lang: req.target_lang.as_str(),
                preserve_tags: req.preserve_tags,
            })
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
            let raw = self.post("/v1/translate", body)?;
            let reply: TranslateReply = serde_json::from_str(&raw)
                .map_err(|e| BackendError::Protocol(format!("/v1/translate: {e}")))?;
            if reply.translations.len() != chunk.len() {
                return Err(BackendError::Cardinality {
                    expected: chunk.len(),
                    got: reply.translations.len(),
                });
            }
            outputs.extend(reply.translations);
        }
        Ok(BackendResponse {
            outputs,
            latency: start.elapsed(),
            backend_id: Translator::backend_id(self),
        })
    }
}

impl Generator for HttpBackend {
    fn backend_id(&self) -> String {
        Translator::backend_id(self)
    }

    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let start = Instant::now();
        let mut outputs = Vec::with_capacity(req.inputs.len());
        for chunk in req.inputs.chunks(self.cfg.max_batch.max(1)) {
            let body = serde_json::to_string(&GenerateBody {
                inputs: chunk,
                task: req.task,
                target_lang_hint: req.target_lang_hint.as_ref().map(|l| l.as_str()),
            })
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
            let raw = self.post("/v1/generate", body)?;
            let reply: GenerateReply = serde_json::from_str(&raw)
                .map_err(|e| BackendError::Protocol(format!("/v1/generate: {e}")))?;
            if reply.outputs.len() != chunk.len() {
                return Err(BackendError::Cardinality {
                    expected: chunk.len(),
                    got: reply.outputs.len(),
                });
            }
            outputs.extend(reply.outputs);
        }
        Ok(BackendResponse {
            outputs,
            latency: start.elapsed(),
            backend_id: Generator::backend_id(self),
        })
    }
}
