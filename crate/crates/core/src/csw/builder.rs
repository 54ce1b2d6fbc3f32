//! Boundary-aware corpus construction: tag, translate with tags, repair,
//! then emit fully translated (CT) and code-switched (CSW) samples plus the
//! bilingual term pairs recovered from the tags.

use std::ops::Range;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tagged::{RepairReport, TagKey, TaggedSentence};
use super::tagging::{tag_sample, TaggedSample};
use crate::artifact::{read_jsonl, write_jsonl, Header};
use crate::backends::{translate_batched, BackendError, Translator, DEFAULT_MAX_BATCH};
use crate::corpus::{Corpus, Lang, Sample, Span, TermKind, Triplet, TripletSpans};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::text::byte_to_char;

pub const PROVENANCE_FORMAT: &str = "ttcsw-csw-provenance";
pub const PAIRS_FORMAT: &str = "ttcsw-parallel-terms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CswMode {
    #[serde(rename = "CT")]
    Ct,
    #[serde(rename = "CSW")]
    Csw,
    #[serde(rename = "DICT_CSW")]
    DictCsw,
}

/// One term of an output sample and the language its surface is in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TermKind>,
    pub source_term: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_term: Option<String>,
    pub language: Lang,
}

/// Provenance of one output sample, keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CswProvenance {
    pub id: String,
    pub mode: CswMode,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelTermPair {
    pub source_term: String,
    pub target_term: String,
    pub kind: TermKind,
    pub sample_id: String,
    pub source_lang: Lang,
    pub target_lang: Lang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CswConfig {
    pub target_lang: Lang,
    /// Per-term switch probability for CSW samples.
    pub switch_rate: f64,
    pub seed: u64,
    /// Exclude samples that lost a tag pair (or had a term left untagged).
    pub strict: bool,
    pub batch_size: usize,
}

impl CswConfig {
    pub fn new(target_lang: Lang) -> Self {
        CswConfig {
            target_lang,
            switch_rate: 0.5,
            seed: 0,
            strict: true,
            batch_size: DEFAULT_MAX_BATCH,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CswDiagnostics {
    pub n_input: usize,
    pub n_retained: usize,
    pub unlocatable: usize,
    pub lossy: usize,
    pub untagged_overlaps: usize,
    pub excluded: usize,
    pub repaired_tags: usize,
    pub notes: Vec<String>,
}

const MAX_NOTES: usize = 100;

impl CswDiagnostics {
    fn note(&mut self, s: String) {
        if self.notes.len() < MAX_NOTES {
            self.notes.push(s);
        }
    }
}

/// Source and translated markup for one retained sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedPair {
    pub id: String,
    pub source: TaggedSentence,
    pub translated: TaggedSentence,
    pub report: RepairReport,
}

#[derive(Debug, Clone)]
pub struct CswBuild {
    pub ct: Corpus,
    pub csw: Corpus,
    pub ct_provenance: Vec<CswProvenance>,
    pub csw_provenance: Vec<CswProvenance>,
    pub pairs: Vec<ParallelTermPair>,
    pub tagged: Vec<TaggedPair>,
    pub diagnostics: CswDiagnostics,
}

/// Translate one tagged sentence and repair the markup of the result.
pub fn translate_tagged<T: Translator + ?Sized>(
    tagged: &TaggedSentence,
    translator: &T,
    source_lang: &Lang,
    target_lang: &Lang,
) -> std::result::Result<(TaggedSentence, RepairReport), BackendError> {
    let out = translate_batched(
        translator,
        &[tagged.text().to_string()],
        source_lang,
        target_lang,
        true,
        1,
    )?;
    Ok(tagged.repair_against(&out[0]))
}

/// One pair per tag present on both sides with non-empty text.
pub fn extract_parallel_terms(
    original: &TaggedSentence,
    translated: &TaggedSentence,
    sample_id: &str,
    source_lang: &Lang,
    target_lang: &Lang,
) -> Vec<ParallelTermPair> {
    original
        .keys()
        .filter_map(|k| {
            let s = original.term(k)?;
            let t = translated.term(k)?;
            (!s.is_empty() && !t.is_empty()).then(|| ParallelTermPair {
                source_term: s.to_string(),
                target_term: t.to_string(),
                kind: k.kind,
                sample_id: sample_id.to_string(),
                source_lang: source_lang.clone(),
                target_lang: target_lang.clone(),
            })
        })
        .collect()
}

fn char_span(text: &str, r: &Range<usize>) -> Span {
    Span::new(byte_to_char(text, r.start), byte_to_char(text, r.end))
}

/// Gold term for one slot after substitution. `surface` is what now stands
/// in the sentence; the original gold string is kept when the surface did
/// not change so that casing and spacing of the annotation survive.
fn slot_term<'a>(gold: &'a str, original_surface: Option<&str>, surface: Option<&'a str>) -> &'a str {
    match (original_surface, surface) {
        (Some(o), Some(s)) if o == s => gold,
        (_, Some(s)) => s,
        _ => gold,
    }
}

struct Assembled {
    sample: Sample,
    provenance: CswProvenance,
}

fn assemble_ct(
    sample: &Sample,
    tagged: &TaggedSample,
    translated: &TaggedSentence,
    src: &Lang,
    tgt: &Lang,
) -> Result<Assembled> {
    let mut gold = Vec::with_capacity(sample.gold.len());
    let mut spans = Vec::with_capacity(sample.gold.len());
    for (t, keys) in sample.gold.iter().zip(&tagged.keys) {
        let mut terms = [String::new(), String::new()];
        let mut sp = TripletSpans::default();
        for (slot, kind) in [TermKind::Aspect, TermKind::Opinion].into_iter().enumerate() {
            let key = keys.of(kind);
            let surface = key.and_then(|k| translated.term(k));
            let orig = key.and_then(|k| tagged.sentence.term(k));
            terms[slot] = slot_term(t.term(kind), orig, surface).to_string();
            if let Some(r) = key.and_then(|k| translated.index().get(&k)) {
                let span = char_span(translated.plain(), r);
                match kind {
                    TermKind::Aspect => sp.aspect.push(span),
                    TermKind::Opinion => sp.opinion.push(span),
                }
            }
        }
        let [a, o] = terms;
        gold.push(Triplet::new(a, o, t.polarity).map_err(|e| Error::Invalid(format!("{}: {e}", sample.id)))?);
        spans.push(sp);
    }
    let terms = tagged
        .sentence
        .keys()
        .map(|k| {
            let target = translated.term(k).map(str::to_string);
            TermRecord {
                tag: Some(k.to_string()),
                kind: Some(k.kind),
                source_term: tagged.sentence.term(k).unwrap_or_default().to_string(),
                language: if target.is_some() { tgt.clone() } else { src.clone() },
                target_term: target,
            }
        })
        .collect();
    let mut out = Sample::new(sample.id.clone(), translated.plain(), tgt.clone(), gold);
    out.spans = Some(spans);
    Ok(Assembled {
        sample: out,
        provenance: CswProvenance {
            id: sample.id.clone(),
            mode: CswMode::Ct,
            terms,
        },
    })
}

fn assemble_csw(
    sample: &Sample,
    tagged: &TaggedSample,
    translated: &TaggedSentence,
    src: &Lang,
    tgt: &Lang,
    cfg: &CswConfig,
) -> Result<Assembled> {
    let source = &tagged.sentence;
    let mut rng = rng_for(cfg.seed, &["csw", &sample.id]);
    let mut switched: Vec<TagKey> = Vec::new();
    for k in source.keys() {
        let draw = rng.gen_bool(cfg.switch_rate);
        if draw && translated.term(k).is_some() {
            switched.push(k);
        }
    }

    let mut by_start: Vec<(TagKey, Range<usize>)> =
        source.index().iter().map(|(k, r)| (*k, r.clone())).collect();
    by_start.sort_by_key(|(_, r)| r.start);
    let plain = source.plain();
    let mut text = String::with_capacity(plain.len());
    let mut new_ranges = std::collections::BTreeMap::new();
    let mut last = 0;
    for (k, r) in by_start {
        text.push_str(&plain[last..r.start]);
        let start = text.len();
        if switched.contains(&k) {
            text.push_str(translated.term(k).unwrap());
        } else {
            text.push_str(&plain[r.clone()]);
        }
        new_ranges.insert(k, start..text.len());
        last = r.end;
    }
    text.push_str(&plain[last..]);

    let mut gold = Vec::with_capacity(sample.gold.len());
    let mut spans = Vec::with_capacity(sample.gold.len());
    for (t, keys) in sample.gold.iter().zip(&tagged.keys) {
        let mut terms = [String::new(), String::new()];
        let mut sp = TripletSpans::default();
        for (slot, kind) in [TermKind::Aspect, TermKind::Opinion].into_iter().enumerate() {
            let key = keys.of(kind);
            let range = key.and_then(|k| new_ranges.get(&k));
            let surface = range.map(|r| &text[r.clone()]);
            let orig = key.and_then(|k| source.term(k));
            terms[slot] = slot_term(t.term(kind), orig, surface).to_string();
            if let Some(r) = range {
                let span = char_span(&text, r);
                match kind {
                    TermKind::Aspect => sp.aspect.push(span),
                    TermKind::Opinion => sp.opinion.push(span),
                }
            }
        }
        let [a, o] = terms;
        gold.push(Triplet::new(a, o, t.polarity).map_err(|e| Error::Invalid(format!("{}: {e}", sample.id)))?);
        spans.push(sp);
    }
    let terms = source
        .keys()
        .map(|k| {
            let on = switched.contains(&k);
            TermRecord {
                tag: Some(k.to_string()),
                kind: Some(k.kind),
                source_term: source.term(k).unwrap_or_default().to_string(),
                target_term: translated.term(k).map(str::to_string),
                language: if on { tgt.clone() } else { src.clone() },
            }
        })
        .collect();
    let mut out = Sample::new(sample.id.clone(), text, src.clone(), gold);
    out.spans = Some(spans);
    Ok(Assembled {
        sample: out,
        provenance: CswProvenance {
            id: sample.id.clone(),
            mode: CswMode::Csw,
            terms,
        },
    })
}

/// Build the CT and CSW corpora for `corpus` translated into
/// `cfg.target_lang`. Both outputs keep the input sample ids and order.
/// Translation batches are issued concurrently on the current rayon pool.
pub fn build_csw_corpus<T: Translator + ?Sized>(corpus: &Corpus, translator: &T, cfg: &CswConfig) -> Result<CswBuild> {
    if !(0.0..=1.0).contains(&cfg.switch_rate) {
        return Err(Error::Invalid(format!("switch rate {} outside [0, 1]", cfg.switch_rate)));
    }
    let src = corpus.language.clone();
    let tgt = cfg.target_lang.clone();
    let mut diag = CswDiagnostics {
        n_input: corpus.len(),
        ..Default::default()
    };

    let mut tagged: Vec<(&Sample, TaggedSample)> = Vec::with_capacity(corpus.len());
    for s in &corpus.samples {
        match tag_sample(s) {
            Ok(t) => tagged.push((s, t)),
            Err(e) => {
                diag.unlocatable += 1;
                diag.note(e.to_string());
            }
        }
    }

    let texts: Vec<String> = tagged.iter().map(|(_, t)| t.sentence.text().to_string()).collect();
    let batch = cfg.batch_size.max(1);
    let translated: Vec<Vec<String>> = texts
        .par_chunks(batch)
        .map(|chunk| translate_batched(translator, chunk, &src, &tgt, true, batch))
        .collect::<std::result::Result<_, _>>()?;
    let translated: Vec<String> = translated.into_iter().flatten().collect();

    let mut ct = Corpus::new(format!("{}.ct.{}", corpus.name, tgt), tgt.clone(), corpus.split);
    let mut csw = Corpus::new(format!("{}.csw.{}", corpus.name, tgt), src.clone(), corpus.split);
    csw.code_switched = true;
    let mut build = CswBuild {
        ct: Corpus::new("", tgt.clone(), corpus.split),
        csw: Corpus::new("", src.clone(), corpus.split),
        ct_provenance: Vec::new(),
        csw_provenance: Vec::new(),
        pairs: Vec::new(),
        tagged: Vec::new(),
        diagnostics: CswDiagnostics::default(),
    };

    for ((sample, tagged), raw) in tagged.into_iter().zip(translated) {
        let (out, report) = tagged.sentence.repair_against(&raw);
        diag.repaired_tags += report.notes.len();
        for n in &report.notes {
            diag.note(format!("{}: {n}", sample.id));
        }
        if report.lossy {
            diag.lossy += 1;
            diag.note(format!(
                "{}: lost {}",
                sample.id,
                report.lost.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
            ));
        }
        if tagged.is_incomplete() {
            diag.untagged_overlaps += 1;
            for n in &tagged.skipped {
                diag.note(format!("{}: {n}", sample.id));
            }
        }
        if cfg.strict && (report.lossy || tagged.is_incomplete()) {
            diag.excluded += 1;
            continue;
        }
        let c = assemble_ct(sample, &tagged, &out, &src, &tgt)?;
        ct.samples.push(c.sample);
        build.ct_provenance.push(c.provenance);
        let s = assemble_csw(sample, &tagged, &out, &src, &tgt, cfg)?;
        csw.samples.push(s.sample);
        build.csw_provenance.push(s.provenance);
        build
            .pairs
            .extend(extract_parallel_terms(&tagged.sentence, &out, &sample.id, &src, &tgt));
        build.tagged.push(TaggedPair {
            id: sample.id.clone(),
            source: tagged.sentence,
            translated: out,
            report,
        });
    }
    diag.n_retained = ct.len();
    build.ct = ct;
    build.csw = csw;
    build.diagnostics = diag;
    Ok(build)
}

pub fn write_provenance(path: &Path, header: Header, records: &[CswProvenance]) -> Result<()> {
    write_jsonl(path, &header, records)
}

pub fn read_provenance(path: &Path) -> Result<Vec<CswProvenance>> {
    Ok(read_jsonl(path, PROVENANCE_FORMAT)?.1)
}

pub fn write_pairs(path: &Path, header: Header, pairs: &[ParallelTermPair]) -> Result<()> {
    write_jsonl(path, &header, pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<ParallelTermPair>> {
    Ok(read_jsonl(path, PAIRS_FORMAT)?.1)
}
