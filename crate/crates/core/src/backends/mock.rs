//! Deterministic in-process backends for tests and offline runs.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{
    alignment_input, BackendError, BackendResponse, GenerationRequest, Generator, Task,
    TranslationRequest, Translator, NONE_LABEL,
};
use crate::corpus::Lang;
use crate::lexicon::Lexicon;

fn respond(backend_id: String, outputs: Vec<String>) -> Result<BackendResponse, BackendError> {
    Ok(BackendResponse {
        outputs,
        latency: Duration::ZERO,
        backend_id,
    })
}

/// Returns every text unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn backend_id(&self) -> String {
        "mock:identity".into()
    }

    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        respond(self.backend_id(), req.texts.clone())
    }
}

/// Word-by-word lexicon lookup. Markup such as `<a1>` passes through
/// untouched and words missing from the lexicon are kept.
#[derive(Debug, Clone)]
pub struct DictionaryTranslator {
    lexicon: Lexicon,
}

impl DictionaryTranslator {
    pub fn new(lexicon: Lexicon) -> Self {
        DictionaryTranslator { lexicon }
    }

    pub fn translate_text(&self, text: &str) -> String {
        static TAG: OnceLock<Regex> = OnceLock::new();
        static WORD: OnceLock<Regex> = OnceLock::new();
        let tag = TAG.get_or_init(|| Regex::new(r"<[^<>]*>").unwrap());
        let word = WORD.get_or_init(|| Regex::new(r"[\w'-]+").unwrap());
        let mut out = String::with_capacity(text.len());
        let mut last = 0;
        let plain = |seg: &str, out: &mut String| {
            let mut prev = 0;
            for m in word.find_iter(seg) {
                out.push_str(&seg[prev..m.start()]);
                out.push_str(self.lexicon.lookup(m.as_str()).unwrap_or(m.as_str()));
                prev = m.end();
            }
            out.push_str(&seg[prev..]);
        };
        for m in tag.find_iter(text) {
            plain(&text[last..m.start()], &mut out);
            out.push_str(m.as_str());
            last = m.end();
        }
        plain(&text[last..], &mut out);
        out
    }
}

impl Translator for DictionaryTranslator {
    fn backend_id(&self) -> String {
        format!("mock:dictionary:{}", self.lexicon.len())
    }

    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let outputs = req.texts.iter().map(|t| self.translate_text(t)).collect();
        respond(self.backend_id(), outputs)
    }
}

/// Returns every input unchanged, for either task.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoGenerator;

impl Generator for EchoGenerator {
    fn backend_id(&self) -> String {
        "mock:echo".into()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        respond(self.backend_id(), req.inputs.clone())
    }
}

/// One row of a fixture table file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    /// `aste`, `align` or `translate`.
    pub task: String,
    pub input: String,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_lang: Option<Lang>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_lang: Option<Lang>,
}

/// Read a fixture table: one JSON object per line, blank lines ignored.
pub fn load_fixture_table(path: &Path) -> crate::Result<Vec<FixtureEntry>> {
    let raw = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| crate::Error::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Table lookup keyed by the exact input text. A miss answers `None` for
/// the alignment task and the empty string for triplet generation.
#[derive(Debug, Clone, Default)]
pub struct FixtureGenerator {
    id: String,
    table: HashMap<(Task, String), String>,
}

impl FixtureGenerator {
    pub fn new(id: impl Into<String>) -> Self {
        FixtureGenerator {
            id: id.into(),
            table: HashMap::new(),
        }
    }

    pub fn from_entries(id: impl Into<String>, entries: &[FixtureEntry]) -> Self {
        let mut g = FixtureGenerator::new(id);
        for e in entries {
            match e.task.as_str() {
                "aste" => g.insert(Task::Aste, &e.input, &e.output),
                "align" => g.insert(Task::Align, &e.input, &e.output),
                _ => {}
            }
        }
        g
    }

    pub fn insert(&mut self, task: Task, input: &str, output: &str) {
        self.table.insert((task, input.to_string()), output.to_string());
    }

    /// Register the aligner answer for `term` queried against `sentence`.
    pub fn insert_alignment(&mut self, sentence: &str, term: &str, aligned: &str) {
        self.insert(Task::Align, &alignment_input(sentence, term), aligned);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Generator for FixtureGenerator {
    fn backend_id(&self) -> String {
        format!("fixture:{}", self.id)
    }

    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let outputs = req
            .inputs
            .iter()
            .map(|i| match self.table.get(&(req.task, i.clone())) {
                Some(o) => o.clone(),
                None if req.task == Task::Align => NONE_LABEL.to_string(),
                None => String::new(),
            })
            .collect();
        respond(self.backend_id(), outputs)
    }
}

/// Table lookup keyed by (source, target, text). A miss returns the text
/// unchanged.
#[derive(Debug, Clone, Default)]
pub struct FixtureTranslator {
    id: String,
    table: HashMap<(Option<Lang>, Option<Lang>, String), String>,
}

impl FixtureTranslator {
    pub fn new(id: impl Into<String>) -> Self {
        FixtureTranslator {
            id: id.into(),
            table: HashMap::new(),
        }
    }

    pub fn from_entries(id: impl Into<String>, entries: &[FixtureEntry]) -> Self {
        let mut t = FixtureTranslator::new(id);
        for e in entries.iter().filter(|e| e.task == "translate") {
            t.table.insert(
                (e.source_lang.clone(), e.target_lang.clone(), e.input.clone()),
                e.output.clone(),
            );
        }
        t
    }

    pub fn insert(&mut self, source: &Lang, target: &Lang, input: &str, output: &str) {
        self.table.insert(
            (Some(source.clone()), Some(target.clone()), input.to_string()),
            output.to_string(),
        );
    }

    fn lookup(&self, req: &TranslationRequest, text: &str) -> Option<&String> {
        let src = Some(req.source_lang.clone());
        let tgt = Some(req.target_lang.clone());
        self.table
            .get(&(src, tgt.clone(), text.to_string()))
            .or_else(|| self.table.get(&(None, tgt, text.to_string())))
            .or_else(|| self.table.get(&(None, None, text.to_string())))
    }
}

impl Translator for FixtureTranslator {
    fn backend_id(&self) -> String {
        format!("fixture:{}", self.id)
    }

    fn translate(&self, req: &TranslationRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let outputs = req
            .texts
            .iter()
            .map(|t| self.lookup(req, t).cloned().unwrap_or_else(|| t.clone()))
            .collect();
        respond(self.backend_id(), outputs)
    }
}
