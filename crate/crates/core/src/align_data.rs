//! Training examples for the bilingual term aligner: `chunk <SEP> term`
//! inputs labelled with the counterpart term's surface in the chunk, or
//! `None`.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::{read_jsonl, write_jsonl, Header};
use crate::backends::{alignment_input, NONE_LABEL, SEP};
use crate::corpus::{Corpus, TermKind};
use crate::csw::ParallelTermPair;
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::text::{find_ci, normalize_ws, tokens, trim_punct};

pub const ALIGN_FORMAT: &str = "ttcsw-align";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Query in the source language, chunk and label in the target.
    #[serde(rename = "src->tgt")]
    SourceToTarget,
    /// Query in the target language, chunk and label in the source.
    #[serde(rename = "tgt->src")]
    TargetToSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignMeta {
    pub sample_id: String,
    pub kind: TermKind,
    pub direction: Direction,
    #[serde(default)]
    pub corrupted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentExample {
    pub input_text: String,
    pub label: String,
    pub meta: AlignMeta,
}

impl AlignmentExample {
    pub fn is_none(&self) -> bool {
        self.label == NONE_LABEL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignConfig {
    /// Chunk length in whitespace tokens.
    pub window: usize,
    pub stride: usize,
    pub corrupt_rate: f64,
    pub seed: u64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            window: 128,
            stride: 64,
            corrupt_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AlignBuild {
    pub examples: Vec<AlignmentExample>,
    pub n_positive: usize,
    pub n_corrupted: usize,
    /// Examples left out because a chunk or term contained the separator.
    pub n_skipped: usize,
}

/// Split `text` into windows of at most `window` whitespace tokens,
/// starting every `stride` tokens, until a window starts past the end.
/// A sentence of at most `window` tokens is a single chunk; an empty one
/// yields one empty chunk.
pub fn chunk_sentence(text: &str, window: usize, stride: usize) -> Result<Vec<String>> {
    if window == 0 || stride == 0 || stride > window {
        return Err(Error::Invalid(format!(
            "need 1 <= stride <= window, got window {window}, stride {stride}"
        )));
    }
    let toks = tokens(text);
    if toks.len() <= window {
        return Ok(vec![toks.join(" ")]);
    }
    Ok((0..toks.len())
        .step_by(stride)
        .map(|s| toks[s..(s + window).min(toks.len())].join(" "))
        .collect())
}

fn vocabulary(corpora: &[&Corpus]) -> Vec<String> {
    let mut v = BTreeSet::new();
    for c in corpora {
        for s in &c.samples {
            for t in tokens(&s.text) {
                let t = trim_punct(t);
                if !t.is_empty() && !t.contains(SEP) {
                    v.insert(t.to_string());
                }
            }
        }
    }
    v.into_iter().collect()
}

/// Build both-direction examples for every pair. `source` holds the
/// original sentences and `target` their translations, matched by sample
/// id. Afterwards exactly `round(corrupt_rate * N)` examples, chosen by
/// seed, get their query replaced by a random vocabulary token and the
/// label `None`.
pub fn build_alignment_examples(
    pairs: &[ParallelTermPair],
    source: &Corpus,
    target: &Corpus,
    cfg: &AlignConfig,
) -> Result<AlignBuild> {
    if !(0.0..=1.0).contains(&cfg.corrupt_rate) {
        return Err(Error::Invalid(format!("corrupt rate {} outside [0, 1]", cfg.corrupt_rate)));
    }
    let src_text: HashMap<&str, &str> = source.samples.iter().map(|s| (s.id.as_str(), s.text.as_str())).collect();
    let tgt_text: HashMap<&str, &str> = target.samples.iter().map(|s| (s.id.as_str(), s.text.as_str())).collect();

    let mut out = AlignBuild::default();
    for p in pairs {
        let missing = |side: &str| Error::Invalid(format!("no {side} sentence for sample {}", p.sample_id));
        let s = src_text.get(p.sample_id.as_str()).ok_or_else(|| missing("source"))?;
        let t = tgt_text.get(p.sample_id.as_str()).ok_or_else(|| missing("target"))?;
        for (direction, sentence, query, answer) in [
            (Direction::SourceToTarget, *t, &p.source_term, &p.target_term),
            (Direction::TargetToSource, *s, &p.target_term, &p.source_term),
        ] {
            let query = normalize_ws(query);
            let answer = normalize_ws(answer);
            for chunk in chunk_sentence(sentence, cfg.window, cfg.stride)? {
                if chunk.contains(SEP) || query.contains(SEP) {
                    out.n_skipped += 1;
                    continue;
                }
                let label = match find_ci(&chunk, &answer) {
                    Some(r) => {
                        out.n_positive += 1;
                        chunk[r].to_string()
                    }
                    None => NONE_LABEL.to_string(),
                };
                out.examples.push(AlignmentExample {
                    input_text: alignment_input(&chunk, &query),
                    label,
                    meta: AlignMeta {
                        sample_id: p.sample_id.clone(),
                        kind: p.kind,
                        direction,
                        corrupted: false,
                    },
                });
            }
        }
    }

    let n = out.examples.len();
    let k = (cfg.corrupt_rate * n as f64).round() as usize;
    if k == 0 {
        return Ok(out);
    }
    let vocab = vocabulary(&[source, target]);
    if vocab.is_empty() {
        return Err(Error::Invalid("corruption requested but the vocabulary is empty".into()));
    }
    let mut rng = rng_for(cfg.seed, &["align-corrupt"]);
    let mut chosen = index::sample(&mut rng, n, k).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        let ex = &mut out.examples[i];
        let (chunk, _) = crate::backends::split_alignment_input(&ex.input_text).expect("built with a separator");
        let token = &vocab[rng.gen_range(0..vocab.len())];
        if !ex.is_none() {
            out.n_positive -= 1;
        }
        ex.input_text = alignment_input(chunk, token);
        ex.label = NONE_LABEL.to_string();
        ex.meta.corrupted = true;
    }
    out.n_corrupted = k;
    Ok(out)
}

pub fn write_alignment_examples(path: &Path, header: Header, examples: &[AlignmentExample]) -> Result<()> {
    write_jsonl(path, &header, examples)
}

pub fn read_alignment_examples(path: &Path) -> Result<Vec<AlignmentExample>> {
    Ok(read_jsonl(path, ALIGN_FORMAT)?.1)
}
