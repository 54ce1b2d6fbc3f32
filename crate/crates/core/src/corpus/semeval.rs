//! Loader for the SemEval-2022 Task 10 structured sentiment files.
//!
//! Each split is a JSON array of records:
//!
//! ```json
//! {"sent_id": "...", "text": "...",
//!  "opinions": [{"Source": [[], []],
//!                "Target": [["sushi"], ["4:9"]],
//!                "Polar_expression": [["great"], ["14:19"]],
//!                "Polarity": "Positive", "Intensity": "Standard"}]}
//! ```
//!
//! Targets become aspects and polar expressions become opinions. Holders
//! (`Source`) and `Intensity` are dropped.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{Corpus, Lang, Polarity, Sample, Span, Split, Triplet, TripletSpans};
use crate::error::{Error, Result};
use crate::text::normalize_ws;

/// Which split file(s) to load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSelection {
    One(Split),
    /// Concatenate train, dev and test. The result is labelled as a test
    /// corpus: the non-English sets are used whole for cross-lingual
    /// evaluation.
    All,
}

impl std::str::FromStr for SplitSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            Ok(SplitSelection::All)
        } else {
            s.parse().map(SplitSelection::One)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestDiagnostics {
    pub records_read: usize,
    pub malformed_records: usize,
    pub unknown_polarity: usize,
    /// Opinions with neither a target nor an expression.
    pub empty_opinions: usize,
    /// Term pieces whose offsets disagree with the annotated text.
    pub span_mismatches: usize,
    pub renamed_ids: usize,
    pub notes: Vec<String>,
}

impl IngestDiagnostics {
    fn note(&mut self, msg: String) {
        const MAX_NOTES: usize = 50;
        if self.notes.len() < MAX_NOTES {
            self.notes.push(msg);
        }
    }

    fn absorb(&mut self, other: IngestDiagnostics) {
        self.records_read += other.records_read;
        self.malformed_records += other.malformed_records;
        self.unknown_polarity += other.unknown_polarity;
        self.empty_opinions += other.empty_opinions;
        self.span_mismatches += other.span_mismatches;
        self.renamed_ids += other.renamed_ids;
        for n in other.notes {
            self.note(n);
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    sent_id: String,
    text: String,
    #[serde(default)]
    opinions: Vec<RawOpinion>,
}

#[derive(Deserialize)]
struct RawOpinion {
    #[serde(rename = "Target", default)]
    target: Option<Vec<Vec<String>>>,
    #[serde(rename = "Polar_expression", default)]
    expression: Option<Vec<Vec<String>>>,
    #[serde(rename = "Polarity", default)]
    polarity: Option<String>,
}

/// Load one or all splits of a dataset directory.
pub fn ingest_semeval(
    dir: &Path,
    language: &Lang,
    selection: SplitSelection,
) -> Result<(Corpus, IngestDiagnostics)> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    match selection {
        SplitSelection::One(split) => {
            let file = dir.join(format!("{}.json", split.file_stem()));
            ingest_semeval_split(&file, &name, language, split)
        }
        SplitSelection::All => {
            let mut merged = Corpus::new(name.clone(), language.clone(), Split::Test);
            let mut diags = IngestDiagnostics::default();
            let mut ids = HashSet::new();
            for split in [Split::Train, Split::Validation, Split::Test] {
                let file = dir.join(format!("{}.json", split.file_stem()));
                let (c, d) = ingest_semeval_split(&file, &name, language, split)?;
                diags.absorb(d);
                for mut s in c.samples {
                    if !ids.insert(s.id.clone()) {
                        let renamed = format!("{}/{}", split.file_stem(), s.id);
                        diags.renamed_ids += 1;
                        diags.note(format!("duplicate id `{}` renamed to `{renamed}`", s.id));
                        s.id = renamed;
                        ids.insert(s.id.clone());
                    }
                    merged.samples.push(s);
                }
            }
            Ok((merged, diags))
        }
    }
}

/// Load a single split file.
pub fn ingest_semeval_split(
    file: &Path,
    name: &str,
    language: &Lang,
    split: Split,
) -> Result<(Corpus, IngestDiagnostics)> {
    let raw = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let records: Vec<serde_json::Value> = serde_json::from_str(&raw).map_err(|e| Error::Format {
        path: file.to_path_buf(),
        line: e.line(),
        message: format!("expected a JSON array of records: {e}"),
    })?;
    let mut diags = IngestDiagnostics::default();
    let mut corpus = Corpus::new(name, language.clone(), split);
    let mut ids = HashSet::new();
    for (idx, value) in records.into_iter().enumerate() {
        diags.records_read += 1;
        let rec: RawRecord = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                diags.malformed_records += 1;
                diags.note(format!("{}: record {idx}: {e}", file.display()));
                continue;
            }
        };
        if !ids.insert(rec.sent_id.clone()) {
            diags.malformed_records += 1;
            diags.note(format!("{}: duplicate sent_id `{}`", file.display(), rec.sent_id));
            continue;
        }
        let mut gold = Vec::new();
        let mut spans = Vec::new();
        for op in &rec.opinions {
            let polarity = match op.polarity.as_deref().map(str::parse::<Polarity>) {
                Some(Ok(p)) if p != Polarity::NonePolar => p,
                other => {
                    diags.unknown_polarity += 1;
                    diags.note(format!(
                        "{}: `{}`: unusable polarity {:?}",
                        file.display(),
                        rec.sent_id,
                        other.map(|r| r.map_err(|e| e.0))
                    ));
                    continue;
                }
            };
            let (aspect, aspect_spans) = join_pieces(&rec.text, op.target.as_deref(), &mut diags);
            let (opinion, opinion_spans) =
                join_pieces(&rec.text, op.expression.as_deref(), &mut diags);
            if aspect.is_empty() && opinion.is_empty() {
                diags.empty_opinions += 1;
                continue;
            }
            // Both terms non-empty or one non-empty with a real polarity,
            // so construction cannot fail.
            let t = Triplet::new(aspect, opinion, polarity)
                .map_err(|e| Error::Invalid(e.to_string()))?;
            gold.push(t);
            spans.push(TripletSpans {
                aspect: aspect_spans,
                opinion: opinion_spans,
            });
        }
        let mut s = Sample::new(rec.sent_id, rec.text, language.clone(), gold);
        s.spans = Some(spans);
        corpus.samples.push(s);
    }
    Ok((corpus, diags))
}

/// Join the pieces of a possibly discontinuous annotation in document
/// order. Returns the term text and the spans that were verified against
/// the sentence.
fn join_pieces(
    text: &str,
    field: Option<&[Vec<String>]>,
    diags: &mut IngestDiagnostics,
) -> (String, Vec<Span>) {
    let Some([texts, offsets, ..]) = field else {
        return (String::new(), Vec::new());
    };
    let mut pieces: Vec<(Option<Span>, &str)> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| (offsets.get(i).and_then(|o| parse_offset(o)), t.as_str()))
        .collect();
    pieces.sort_by_key(|(sp, _)| sp.map(|s| (s.start, s.end)).unwrap_or((usize::MAX, 0)));
    let mut words = Vec::new();
    let mut spans = Vec::new();
    let mut spans_ok = true;
    for (sp, piece) in pieces {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        words.push(piece);
        match sp.filter(|s| !s.is_empty()) {
            Some(s) if s.slice(text).map(normalize_ws) == Some(normalize_ws(piece)) => {
                spans.push(s)
            }
            _ => {
                diags.span_mismatches += 1;
                spans_ok = false;
            }
        }
    }
    if !spans_ok {
        spans.clear();
    }
    (words.join(" "), spans)
}

fn parse_offset(s: &str) -> Option<Span> {
    let (a, b) = s.split_once(':')?;
    Some(Span::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_split(dir: &Path, stem: &str, body: &str) {
        fs::write(dir.join(format!("{stem}.json")), body).unwrap();
    }

    const TRAIN: &str = r#"[
      {"sent_id": "a", "text": "The sushi was great but pricey",
       "opinions": [
         {"Source": [["I"], ["0:1"]], "Target": [["sushi"], ["4:9"]],
          "Polar_expression": [["great"], ["14:19"]], "Polarity": "Positive", "Intensity": "Strong"},
         {"Source": [[], []], "Target": [["sushi"], ["4:9"]],
          "Polar_expression": [["pricey"], ["24:30"]], "Polarity": "negative", "Intensity": "Standard"}
       ]},
      {"sent_id": "b", "text": "We arrived at noon.", "opinions": []},
      {"sent_id": "c", "text": "Rooms clean , staff not so friendly",
       "opinions": [
         {"Source": [[], []], "Target": [["staff"], ["14:19"]],
          "Polar_expression": [["friendly", "not so"], ["27:35", "20:26"]], "Polarity": "Negative", "Intensity": "Standard"},
         {"Source": [[], []], "Target": [[], []],
          "Polar_expression": [["clean"], ["6:11"]], "Polarity": "Mixed", "Intensity": "Standard"}
       ]},
      {"text": "record without id"}
    ]"#;

    #[test]
    fn ingest_maps_fields_and_counts_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "train", TRAIN);
        let en = Lang::new("en").unwrap();
        let (c, d) =
            ingest_semeval(dir.path(), &en, SplitSelection::One(Split::Train)).unwrap();
        assert_eq!(c.samples.len(), 3);
        assert_eq!(d.malformed_records, 1);
        assert_eq!(d.unknown_polarity, 1);
        let a = &c.samples[0];
        assert_eq!(a.gold.len(), 2);
        assert_eq!(a.gold[1].polarity, Polarity::Negative);
        assert!(c.samples[1].gold.is_empty());
        // discontinuous expression joined in document order
        assert_eq!(c.samples[2].gold[0].opinion, "not so friendly");
        c.validate().unwrap();
    }

    #[test]
    fn missing_split_file_is_fatal_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let en = Lang::new("en").unwrap();
        let err = ingest_semeval(dir.path(), &en, SplitSelection::One(Split::Test)).unwrap_err();
        assert!(err.to_string().contains("test.json"), "{err}");
    }

    #[test]
    fn all_splits_merge_into_test() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "train", TRAIN);
        write_split(dir.path(), "dev", r#"[{"sent_id": "a", "text": "dup id", "opinions": []}]"#);
        write_split(dir.path(), "test", r#"[{"sent_id": "z", "text": "last", "opinions": []}]"#);
        let en = Lang::new("en").unwrap();
        let (c, d) = ingest_semeval(dir.path(), &en, SplitSelection::All).unwrap();
        assert_eq!(c.split, Split::Test);
        assert_eq!(c.samples.len(), 5);
        assert_eq!(d.renamed_ids, 1);
        c.validate().unwrap();
    }
}
