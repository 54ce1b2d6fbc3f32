//! Word-level code-switching through a bilingual lexicon (the baseline the
//! boundary-aware builder is compared against).

use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::builder::{CswMode, CswProvenance, TermRecord};
use super::tagging::locate_term;
use crate::corpus::{Corpus, Lang, Sample, Span, TermKind, Triplet, TripletSpans};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::rng::rng_for;
use crate::text::{byte_to_char, token_ranges};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictStrategy {
    /// One switch pattern per sample, fixed across epochs.
    #[default]
    Static,
    /// A fresh pattern every epoch.
    Dynamic,
}

impl FromStr for DictStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(DictStrategy::Static),
            "dynamic" => Ok(DictStrategy::Dynamic),
            _ => Err(Error::Invalid(format!("unknown strategy `{s}` (static|dynamic)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictCswConfig {
    pub target_lang: Lang,
    pub ratio: f64,
    pub strategy: DictStrategy,
    pub seed: u64,
    pub epoch: u32,
}

impl DictCswConfig {
    pub fn new(target_lang: Lang) -> Self {
        DictCswConfig {
            target_lang,
            ratio: 0.3,
            strategy: DictStrategy::Static,
            seed: 0,
            epoch: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DictCswBuild {
    pub corpus: Corpus,
    pub provenance: Vec<CswProvenance>,
    /// Gold terms that could not be located and were left unchanged.
    pub unlocated_terms: usize,
}

struct Edit {
    old: Range<usize>,
    new: Range<usize>,
}

fn map_pos(p: usize, edits: &[Edit]) -> usize {
    let mut delta: isize = 0;
    for e in edits.iter().take_while(|e| e.old.end <= p) {
        delta += e.new.len() as isize - e.old.len() as isize;
    }
    (p as isize + delta) as usize
}

fn switch_sample(sample: &Sample, lexicon: &Lexicon, cfg: &DictCswConfig) -> (Sample, CswProvenance, usize) {
    let epoch = cfg.epoch.to_string();
    let mut rng = match cfg.strategy {
        DictStrategy::Static => rng_for(cfg.seed, &["dict", &sample.id]),
        DictStrategy::Dynamic => rng_for(cfg.seed, &["dict", &epoch, &sample.id]),
    };

    let mut unlocated = 0;
    let mut located: Vec<Vec<Option<Range<usize>>>> = Vec::with_capacity(sample.gold.len());
    for i in 0..sample.gold.len() {
        let mut slots = Vec::with_capacity(2);
        for kind in [TermKind::Aspect, TermKind::Opinion] {
            match locate_term(sample, i, kind) {
                Ok(r) => slots.push(r),
                Err(_) => {
                    unlocated += 1;
                    slots.push(None);
                }
            }
        }
        located.push(slots);
    }
    let term_ranges: Vec<&Range<usize>> = located.iter().flatten().flatten().collect();

    let text = &sample.text;
    let mut out = String::with_capacity(text.len());
    let mut edits = Vec::new();
    let mut records = Vec::new();
    let mut last = 0;
    for tok in token_ranges(text) {
        let draw = rng.gen_bool(cfg.ratio);
        let word = &text[tok.clone()];
        let lead = word.len() - word.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
        let core_len = word[lead..].trim_end_matches(|c: char| !c.is_alphanumeric()).len();
        if core_len == 0 || !draw {
            continue;
        }
        let core = tok.start + lead..tok.start + lead + core_len;
        let straddles = term_ranges
            .iter()
            .any(|r| r.start < core.end && core.start < r.end && !(r.start <= core.start && core.end <= r.end));
        if straddles {
            continue;
        }
        let Some(target) = lexicon.lookup(&text[core.clone()]) else {
            continue;
        };
        out.push_str(&text[last..core.start]);
        let start = out.len();
        out.push_str(target);
        edits.push(Edit {
            old: core.clone(),
            new: start..out.len(),
        });
        records.push(TermRecord {
            tag: None,
            kind: None,
            source_term: text[core.clone()].to_string(),
            target_term: Some(target.to_string()),
            language: cfg.target_lang.clone(),
        });
        last = core.end;
    }
    out.push_str(&text[last..]);

    let provenance = CswProvenance {
        id: sample.id.clone(),
        mode: CswMode::DictCsw,
        terms: records,
    };
    if edits.is_empty() {
        return (sample.clone(), provenance, unlocated);
    }

    let mut gold = Vec::with_capacity(sample.gold.len());
    let mut spans = Vec::with_capacity(sample.gold.len());
    for (t, slots) in sample.gold.iter().zip(&located) {
        let mut terms = [t.aspect.clone(), t.opinion.clone()];
        let mut sp = TripletSpans::default();
        for (slot, kind) in [TermKind::Aspect, TermKind::Opinion].into_iter().enumerate() {
            let Some(r) = &slots[slot] else { continue };
            let nr = map_pos(r.start, &edits)..map_pos(r.end, &edits);
            if edits.iter().any(|e| r.start <= e.old.start && e.old.end <= r.end) {
                terms[slot] = out[nr.clone()].to_string();
            }
            let span = Span::new(byte_to_char(&out, nr.start), byte_to_char(&out, nr.end));
            match kind {
                TermKind::Aspect => sp.aspect.push(span),
                TermKind::Opinion => sp.opinion.push(span),
            }
        }
        let [a, o] = terms;
        gold.push(Triplet::new(a, o, t.polarity).expect("switched terms stay non-empty"));
        spans.push(sp);
    }
    let mut s = Sample::new(sample.id.clone(), out, sample.language.clone(), gold);
    s.spans = Some(spans);
    (s, provenance, unlocated)
}

/// Switch each word of every sample with probability `cfg.ratio` when the
/// lexicon knows it. Gold terms follow the words they contain.
pub fn build_dict_csw(corpus: &Corpus, lexicon: &Lexicon, cfg: &DictCswConfig) -> Result<DictCswBuild> {
    if lexicon.is_empty() {
        return Err(Error::Invalid("bilingual lexicon is empty".into()));
    }
    if !(0.0..=1.0).contains(&cfg.ratio) {
        return Err(Error::Invalid(format!("ratio {} outside [0, 1]", cfg.ratio)));
    }
    let mut out = Corpus::new(
        format!("{}.dict-csw.{}", corpus.name, cfg.target_lang),
        corpus.language.clone(),
        corpus.split,
    );
    out.code_switched = true;
    let mut provenance = Vec::with_capacity(corpus.len());
    let mut unlocated_terms = 0;
    for s in &corpus.samples {
        let (sample, prov, n) = switch_sample(s, lexicon, cfg);
        out.samples.push(sample);
        provenance.push(prov);
        unlocated_terms += n;
    }
    Ok(DictCswBuild {
        corpus: out,
        provenance,
        unlocated_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Polarity, Split};

    fn en() -> Lang {
        Lang::new("en").unwrap()
    }

    fn corpus() -> Corpus {
        let mut c = Corpus::new("toy", en(), Split::Train);
        for i in 0..20 {
            c.samples.push(Sample::new(
                i.to_string(),
                "The food was really good, and the staff nice.",
                en(),
                vec![
                    Triplet::new("food", "really good", Polarity::Positive).unwrap(),
                    Triplet::new("staff", "nice", Polarity::Positive).unwrap(),
                ],
            ));
        }
        c
    }

    fn lex() -> Lexicon {
        Lexicon::from_pairs([
            ("food", "comida"),
            ("good", "buena"),
            ("staff", "personal"),
            ("nice", "amable"),
            ("the", "el"),
        ])
        .unwrap()
    }

    #[test]
    fn ratio_zero_is_identity() {
        let c = corpus();
        let mut cfg = DictCswConfig::new(Lang::new("es").unwrap());
        cfg.ratio = 0.0;
        assert_eq!(build_dict_csw(&c, &lex(), &cfg).unwrap().corpus.samples, c.samples);
    }

    #[test]
    fn ratio_one_switches_every_known_word() {
        let c = corpus();
        let mut cfg = DictCswConfig::new(Lang::new("es").unwrap());
        cfg.ratio = 1.0;
        let b = build_dict_csw(&c, &lex(), &cfg).unwrap();
        let s = &b.corpus.samples[0];
        assert_eq!(s.text, "el comida was really buena, and el personal amable.");
        assert_eq!(s.gold[0].aspect, "comida");
        assert_eq!(s.gold[0].opinion, "really buena");
        assert_eq!(s.gold[1].opinion, "amable");
        assert!(s.check_spans().is_ok());
        assert_eq!(b.provenance[0].terms.len(), 6);
    }

    #[test]
    fn dynamic_epochs_differ_static_do_not() {
        let c = corpus();
        let mut cfg = DictCswConfig::new(Lang::new("es").unwrap());
        cfg.strategy = DictStrategy::Dynamic;
        cfg.epoch = 1;
        let e1 = build_dict_csw(&c, &lex(), &cfg).unwrap().corpus;
        cfg.epoch = 2;
        let e2 = build_dict_csw(&c, &lex(), &cfg).unwrap().corpus;
        assert_ne!(e1.samples, e2.samples);
        cfg.strategy = DictStrategy::Static;
        let s1 = build_dict_csw(&c, &lex(), &cfg).unwrap().corpus;
        cfg.epoch = 1;
        let s2 = build_dict_csw(&c, &lex(), &cfg).unwrap().corpus;
        assert_eq!(s1.samples, s2.samples);
    }

    #[test]
    fn empty_lexicon_is_rejected() {
        let cfg = DictCswConfig::new(Lang::new("es").unwrap());
        assert!(build_dict_csw(&corpus(), &Lexicon::default(), &cfg).is_err());
    }
}
