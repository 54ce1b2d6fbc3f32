use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::phrases::enumerate_phrases;
use super::TtaConfig;
use crate::backends::{alignment_input, generate_batched, is_none_label, BackendError, Generator, Task};
use crate::text::find_ci;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The phrase comes from the (translated) source-language sentence.
    Src,
    /// The phrase comes from the original target-language sentence.
    Tgt,
}

/// A phrase and its aligned counterpart in the other sentence. Spans are
/// byte ranges: `phrase_span` in the phrase's own sentence, `aligned_span`
/// in the opposite one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPhrase {
    pub phrase: String,
    pub source_side: Side,
    pub aligned_text: String,
    pub aligned_span: Option<Range<usize>>,
    pub phrase_span: Range<usize>,
    pub length_tokens: usize,
}

impl AlignedPhrase {
    /// (source-language text, span in `s_src`).
    pub fn src_part(&self) -> (&str, Option<Range<usize>>) {
        match self.source_side {
            Side::Src => (&self.phrase, Some(self.phrase_span.clone())),
            Side::Tgt => (&self.aligned_text, self.aligned_span.clone()),
        }
    }

    /// (target-language text, span in `s_tgt`).
    pub fn tgt_part(&self) -> (&str, Option<Range<usize>>) {
        match self.source_side {
            Side::Src => (&self.aligned_text, self.aligned_span.clone()),
            Side::Tgt => (&self.phrase, Some(self.phrase_span.clone())),
        }
    }
}

fn locate(sentence: &str, text: &str) -> Option<Range<usize>> {
    sentence
        .find(text)
        .map(|s| s..s + text.len())
        .or_else(|| find_ci(sentence, text))
}

/// Query the aligner for every n-gram of both sentences and keep the
/// `top_k_phrases` longest phrases that align to something. Source-side
/// phrases are asked against `s_tgt` and target-side phrases against
/// `s_src`, all in one batched call. Ties in length keep query order:
/// source phrases by position, then target phrases by position.
pub fn select_candidates<G: Generator + ?Sized>(
    s_tgt: &str,
    s_src: &str,
    aligner: &G,
    cfg: &TtaConfig,
) -> Result<Vec<AlignedPhrase>, BackendError> {
    let src_phrases = enumerate_phrases(s_src, cfg.max_ngram);
    let tgt_phrases = enumerate_phrases(s_tgt, cfg.max_ngram);
    let queries: Vec<(Side, &super::phrases::Phrase, &str)> = src_phrases
        .iter()
        .map(|p| (Side::Src, p, s_tgt))
        .chain(tgt_phrases.iter().map(|p| (Side::Tgt, p, s_src)))
        .collect();
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    let inputs: Vec<String> = queries.iter().map(|(_, p, opp)| alignment_input(opp, &p.text)).collect();
    let outputs = generate_batched(aligner, &inputs, Task::Align, None, cfg.batch_size)?;

    let mut kept: Vec<AlignedPhrase> = queries
        .into_iter()
        .zip(outputs)
        .filter(|(_, out)| !is_none_label(out))
        .map(|((side, p, opp), out)| {
            let aligned = out.trim().to_string();
            AlignedPhrase {
                aligned_span: locate(opp, &aligned),
                phrase: p.text.clone(),
                source_side: side,
                aligned_text: aligned,
                phrase_span: p.span.clone(),
                length_tokens: p.n_tokens,
            }
        })
        .collect();
    kept.sort_by(|a, b| b.length_tokens.cmp(&a.length_tokens));
    kept.truncate(cfg.top_k_phrases);
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AugmentKind {
    /// Target sentence with one span replaced by its source-language text.
    #[serde(rename = "TGT_WITH_SRC_PHRASE")]
    TgtWithSrcPhrase,
    /// Source sentence with one span replaced by its target-language text.
    #[serde(rename = "SRC_WITH_TGT_PHRASE")]
    SrcWithTgtPhrase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedInput {
    pub sentence: String,
    pub kind: AugmentKind,
    pub phrase: AlignedPhrase,
    /// The text inserted into the sentence.
    pub inserted: String,
    /// The text it replaced.
    pub replaced: String,
}

fn splice(s: &str, r: &Range<usize>, with: &str) -> String {
    let mut out = String::with_capacity(s.len() + with.len());
    out.push_str(&s[..r.start]);
    out.push_str(with);
    out.push_str(&s[r.end..]);
    out
}

/// Two code-switched inputs per phrase, in phrase rank order: first the
/// target sentence carrying the source text, then the source sentence
/// carrying the target text. The list is cut at `n_candidates`. Phrases
/// whose counterpart cannot be found in its sentence are skipped and
/// reported.
pub fn build_augmented_inputs(
    s_tgt: &str,
    s_src: &str,
    phrases: &[AlignedPhrase],
    n_candidates: usize,
) -> (Vec<AugmentedInput>, Vec<String>) {
    let mut out = Vec::new();
    let mut notes = Vec::new();
    for p in phrases {
        if out.len() >= n_candidates {
            break;
        }
        let (src_text, src_span) = p.src_part();
        let (tgt_text, tgt_span) = p.tgt_part();
        let (Some(src_span), Some(tgt_span)) = (src_span, tgt_span) else {
            notes.push(format!("aligned text {:?} not found in its sentence; skipped", p.aligned_text));
            continue;
        };
        out.push(AugmentedInput {
            sentence: splice(s_tgt, &tgt_span, src_text),
            kind: AugmentKind::TgtWithSrcPhrase,
            phrase: p.clone(),
            inserted: src_text.to_string(),
            replaced: s_tgt[tgt_span.clone()].to_string(),
        });
        out.push(AugmentedInput {
            sentence: splice(s_src, &src_span, tgt_text),
            kind: AugmentKind::SrcWithTgtPhrase,
            phrase: p.clone(),
            inserted: s_tgt[tgt_span].to_string(),
            replaced: s_src[src_span].to_string(),
        });
    }
    out.truncate(n_candidates);
    (out, notes)
}
