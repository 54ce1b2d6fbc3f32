use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Corpus, Sample, Span, TermKind};

/// Dataset statistics in the shape of a sentences/aspects/opinions table.
///
/// `n_aspects` and `n_opinions` count non-empty term slots over all
/// triplets. The `unique_*` counts collapse terms that several triplets of
/// the same sentence share (same span, or same text when no spans exist).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_sentences: usize,
    pub n_aspects: usize,
    pub n_opinions: usize,
    pub n_triplets: usize,
    pub empty_label_rate: f64,
    pub unique_aspects: usize,
    pub unique_opinions: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut r = StatsReport {
        n_sentences: corpus.samples.len(),
        ..StatsReport::default()
    };
    let mut empty = 0usize;
    for s in &corpus.samples {
        if s.gold.is_empty() {
            empty += 1;
        }
        r.n_triplets += s.gold.len();
        r.n_aspects += s.gold.iter().filter(|t| !t.aspect.is_empty()).count();
        r.n_opinions += s.gold.iter().filter(|t| !t.opinion.is_empty()).count();
        r.unique_aspects += unique_terms(s, TermKind::Aspect);
        r.unique_opinions += unique_terms(s, TermKind::Opinion);
    }
    r.empty_label_rate = if r.n_sentences == 0 {
        0.0
    } else {
        empty as f64 / r.n_sentences as f64
    };
    r
}

fn unique_terms(s: &Sample, kind: TermKind) -> usize {
    #[derive(PartialEq, Eq, Hash)]
    enum Key<'a> {
        Spans(&'a [Span]),
        Text(&'a str),
    }
    let mut seen = HashSet::new();
    for (i, t) in s.gold.iter().enumerate() {
        let term = t.term(kind);
        if term.is_empty() {
            continue;
        }
        let key = match s.spans.as_ref().and_then(|sp| sp.get(i)).map(|sp| sp.of(kind)) {
            Some(sp) if !sp.is_empty() => Key::Spans(sp),
            _ => Key::Text(term),
        };
        seen.insert(key);
    }
    seen.len()
}
