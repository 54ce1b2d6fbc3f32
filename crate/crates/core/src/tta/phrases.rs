use std::collections::HashSet;
use std::ops::Range;

use crate::text::token_ranges;

/// A contiguous token n-gram of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub text: String,
    /// Byte range in the sentence.
    pub span: Range<usize>,
    pub first_token: usize,
    pub n_tokens: usize,
}

/// All n-grams of 1..=`max_ngram` whitespace tokens, ordered by start
/// token then length. Punctuation at either edge is trimmed; phrases that
/// are only punctuation are dropped and repeats keep their first position.
pub fn enumerate_phrases(sentence: &str, max_ngram: usize) -> Vec<Phrase> {
    let toks = token_ranges(sentence);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for start in 0..toks.len() {
        for n in 1..=max_ngram.min(toks.len() - start) {
            let raw = toks[start].start..toks[start + n - 1].end;
            let seg = &sentence[raw.clone()];
            let lead = seg.len() - seg.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
            let trimmed = seg[lead..].trim_end_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                continue;
            }
            let span = raw.start + lead..raw.start + lead + trimmed.len();
            if seen.insert(trimmed.to_string()) {
                out.push(Phrase {
                    text: trimmed.to_string(),
                    span,
                    first_token: start,
                    n_tokens: n,
                });
            }
        }
    }
    out
}
