//! The triplet data model: polarities, triplets, samples and corpora.

mod io;
mod semeval;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use io::{export_corpus, export_corpus_with, import_corpus, CORPUS_FORMAT};
pub use semeval::{ingest_semeval, ingest_semeval_split, IngestDiagnostics, SplitSelection};
pub use stats::{corpus_stats, StatsReport};

use crate::error::{Error, Result};
use crate::text::normalize_ws;

/// Sentiment polarity of a triplet. `NonePolar` is reserved for the empty
/// triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
    NonePolar,
}

impl Polarity {
    pub const ALL: [Polarity; 4] = [
        Polarity::Positive,
        Polarity::Negative,
        Polarity::Neutral,
        Polarity::NonePolar,
    ];

    /// Short label used on the wire and in corpus files.
    pub fn code(self) -> &'static str {
        match self {
            Polarity::Positive => "POS",
            Polarity::Negative => "NEG",
            Polarity::Neutral => "NEU",
            Polarity::NonePolar => "NONE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown polarity label `{0}`")]
pub struct UnknownPolarity(pub String);

impl FromStr for Polarity {
    type Err = UnknownPolarity;

    /// Case-insensitive; accepts both the short codes and the full names
    /// used by the SemEval files.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pos" | "positive" => Ok(Polarity::Positive),
            "neg" | "negative" => Ok(Polarity::Negative),
            "neu" | "neutral" => Ok(Polarity::Neutral),
            "none" => Ok(Polarity::NonePolar),
            _ => Err(UnknownPolarity(s.to_string())),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Polarity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Polarity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An (aspect, opinion, polarity) triplet. Terms may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triplet {
    pub aspect: String,
    pub opinion: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TripletError {
    #[error("a triplet with two empty terms must have polarity NONE, got {0}")]
    EmptyWithPolarity(Polarity),
    #[error("polarity NONE is reserved for the empty triplet")]
    NoneOnNonEmpty,
}

impl Triplet {
    /// Build a triplet, trimming surrounding whitespace from both terms.
    pub fn new(
        aspect: impl AsRef<str>,
        opinion: impl AsRef<str>,
        polarity: Polarity,
    ) -> std::result::Result<Self, TripletError> {
        let t = Triplet {
            aspect: aspect.as_ref().trim().to_string(),
            opinion: opinion.as_ref().trim().to_string(),
            polarity,
        };
        t.check()?;
        Ok(t)
    }

    /// The distinguished empty triplet `("", "", NONE)`.
    pub fn empty() -> Self {
        Triplet {
            aspect: String::new(),
            opinion: String::new(),
            polarity: Polarity::NonePolar,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.aspect.is_empty() && self.opinion.is_empty()
    }

    fn check(&self) -> std::result::Result<(), TripletError> {
        match (self.is_empty(), self.polarity) {
            (true, Polarity::NonePolar) | (false, Polarity::Positive)
            | (false, Polarity::Negative) | (false, Polarity::Neutral) => Ok(()),
            (true, p) => Err(TripletError::EmptyWithPolarity(p)),
            (false, Polarity::NonePolar) => Err(TripletError::NoneOnNonEmpty),
        }
    }

    pub fn term(&self, kind: TermKind) -> &str {
        match kind {
            TermKind::Aspect => &self.aspect,
            TermKind::Opinion => &self.opinion,
        }
    }
}

impl<'de> Deserialize<'de> for Triplet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            aspect: String,
            opinion: String,
            polarity: Polarity,
        }
        let raw = Raw::deserialize(d)?;
        if raw.aspect.trim() != raw.aspect || raw.opinion.trim() != raw.opinion {
            return Err(serde::de::Error::custom("term has surrounding whitespace"));
        }
        Triplet::new(raw.aspect, raw.opinion, raw.polarity).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Aspect,
    Opinion,
}

impl TermKind {
    pub fn tag_letter(self) -> char {
        match self {
            TermKind::Aspect => 'a',
            TermKind::Opinion => 'o',
        }
    }
}

/// Two-letter ISO 639-1 language code, stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Lang(String);

impl Lang {
    pub fn new(code: &str) -> Result<Self> {
        let lower = code.trim().to_ascii_lowercase();
        if lower.len() == 2 && lower.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Lang(lower))
        } else {
            Err(Error::Invalid(format!(
                "`{code}` is not a two-letter ISO 639-1 code"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Lang {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Lang::new(s)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Lang {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Lang::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Character-offset range `[start, end)` into a sample's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// The substring this span covers, if it lies within `text`.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        let b0 = crate::text::char_to_byte(text, self.start)?;
        let b1 = crate::text::char_to_byte(text, self.end)?;
        (b0 <= b1).then(|| &text[b0..b1])
    }
}

/// Source offsets of one triplet's terms. A term annotated as several
/// discontinuous pieces has several spans, in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletSpans {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aspect: Vec<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub opinion: Vec<Span>,
}

impl TripletSpans {
    pub fn of(&self, kind: TermKind) -> &[Span] {
        match kind {
            TermKind::Aspect => &self.aspect,
            TermKind::Opinion => &self.opinion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub language: Lang,
    pub gold: Vec<Triplet>,
    /// Per-triplet span provenance, parallel to `gold`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<TripletSpans>>,
}

impl Sample {
    pub fn new(id: impl Into<String>, text: impl Into<String>, language: Lang, gold: Vec<Triplet>) -> Self {
        Sample {
            id: id.into(),
            text: text.into(),
            language,
            gold,
            spans: None,
        }
    }

    /// Check that every stored span covers its term (modulo whitespace).
    pub fn check_spans(&self) -> std::result::Result<(), String> {
        let Some(spans) = &self.spans else {
            return Ok(());
        };
        if spans.len() != self.gold.len() {
            return Err(format!(
                "sample {}: {} span entries for {} triplets",
                self.id,
                spans.len(),
                self.gold.len()
            ));
        }
        for (t, s) in self.gold.iter().zip(spans) {
            for kind in [TermKind::Aspect, TermKind::Opinion] {
                let pieces = s.of(kind);
                if pieces.is_empty() {
                    continue;
                }
                let mut joined = Vec::new();
                for sp in pieces {
                    let piece = sp.slice(&self.text).ok_or_else(|| {
                        format!("sample {}: span {:?} outside text", self.id, sp)
                    })?;
                    joined.push(piece);
                }
                if normalize_ws(&joined.join(" ")) != normalize_ws(t.term(kind)) {
                    return Err(format!(
                        "sample {}: span text {:?} does not match {:?} term {:?}",
                        self.id,
                        joined.join(" "),
                        kind,
                        t.term(kind)
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    /// File stem used by the SemEval-2022 Task 10 distribution.
    pub fn file_stem(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            _ => Err(Error::Invalid(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub language: Lang,
    pub split: Split,
    /// Set for corpora whose samples legitimately mix languages.
    pub code_switched: bool,
    pub samples: Vec<Sample>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, language: Lang, split: Split) -> Self {
        Corpus {
            name: name.into(),
            language,
            split,
            code_switched: false,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Check corpus-level invariants: unique ids, a single language unless
    /// marked code-switched, and span provenance.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.samples {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate sample id `{}`", s.id)));
            }
            if !self.code_switched && s.language != self.language {
                return Err(Error::Invalid(format!(
                    "sample `{}` has language {} in a {} corpus",
                    s.id, s.language, self.language
                )));
            }
            s.check_spans().map_err(Error::Invalid)?;
        }
        Ok(())
    }

    /// Reject terms containing the serialization's reserved tokens, which
    /// cannot be emitted unambiguously.
    pub fn check_serializable(&self) -> Result<()> {
        for s in &self.samples {
            for t in &s.gold {
                if crate::triplet_format::contains_reserved(&t.aspect)
                    || crate::triplet_format::contains_reserved(&t.opinion)
                {
                    return Err(Error::Invalid(format!(
                        "sample `{}`: term contains a reserved token: {:?}",
                        s.id, t
                    )));
                }
            }
        }
        Ok(())
    }
}
