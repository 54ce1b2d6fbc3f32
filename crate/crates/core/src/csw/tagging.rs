//! Locating gold terms in their sentence and wrapping them in tags.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::tagged::{TagKey, TaggedSentence};
use crate::corpus::{Sample, TermKind};
use crate::text::{char_to_byte, find_ci};

/// Which tag (if any) stands for each slot of one gold triplet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletKeys {
    pub aspect: Option<TagKey>,
    pub opinion: Option<TagKey>,
}

impl TripletKeys {
    pub fn of(&self, kind: TermKind) -> Option<TagKey> {
        match kind {
            TermKind::Aspect => self.aspect,
            TermKind::Opinion => self.opinion,
        }
    }

    fn set(&mut self, kind: TermKind, key: TagKey) {
        match kind {
            TermKind::Aspect => self.aspect = Some(key),
            TermKind::Opinion => self.opinion = Some(key),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSample {
    pub sentence: TaggedSentence,
    /// Parallel to the sample's gold list.
    pub keys: Vec<TripletKeys>,
    /// Terms that could not be tagged because they overlap another span.
    pub skipped: Vec<String>,
}

impl TaggedSample {
    /// Some non-empty gold term has no tag.
    pub fn is_incomplete(&self) -> bool {
        !self.skipped.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sample {sample}: {kind:?} term {term:?} of triplet {triplet} cannot be located")]
pub struct Unlocatable {
    pub sample: String,
    pub triplet: usize,
    pub kind: TermKind,
    pub term: String,
}

fn trim_ws(text: &str, r: Range<usize>) -> Range<usize> {
    let seg = &text[r.clone()];
    let lead = seg.len() - seg.trim_start().len();
    let trail = seg.len() - seg.trim_end().len();
    if lead == seg.len() {
        r.start..r.start
    } else {
        r.start + lead..r.end - trail
    }
}

/// Byte range of a gold term in the sample text: the stored span when it
/// is a single piece, otherwise the first occurrence of the term
/// (case-sensitive, then case-insensitive). `Ok(None)` for an empty term.
pub fn locate_term(sample: &Sample, triplet: usize, kind: TermKind) -> Result<Option<Range<usize>>, Unlocatable> {
    let term = sample.gold[triplet].term(kind);
    if term.is_empty() {
        return Ok(None);
    }
    let fail = || Unlocatable {
        sample: sample.id.clone(),
        triplet,
        kind,
        term: term.to_string(),
    };
    let pieces = sample
        .spans
        .as_ref()
        .and_then(|s| s.get(triplet))
        .map(|s| s.of(kind))
        .unwrap_or(&[]);
    let range = match pieces {
        [] => sample
            .text
            .find(term)
            .map(|s| s..s + term.len())
            .or_else(|| find_ci(&sample.text, term))
            .ok_or_else(fail)?,
        [one] => {
            let b0 = char_to_byte(&sample.text, one.start).ok_or_else(fail)?;
            let b1 = char_to_byte(&sample.text, one.end).ok_or_else(fail)?;
            if b0 >= b1 {
                return Err(fail());
            }
            b0..b1
        }
        _ => return Err(fail()),
    };
    let range = trim_ws(&sample.text, range);
    if range.is_empty() {
        return Err(fail());
    }
    Ok(Some(range))
}

/// Wrap every distinct aspect and opinion span of `sample` in tags.
/// Indices are assigned per kind in left-to-right order. When two distinct
/// spans overlap, the earlier-starting one wins (ties: the longer, then the
/// aspect) and the other term is left untagged and reported in `skipped`.
pub fn tag_sample(sample: &Sample) -> Result<TaggedSample, Unlocatable> {
    struct Cand {
        range: Range<usize>,
        kind: TermKind,
        slots: Vec<usize>,
    }
    let mut cands: Vec<Cand> = Vec::new();
    for i in 0..sample.gold.len() {
        for kind in [TermKind::Aspect, TermKind::Opinion] {
            if let Some(range) = locate_term(sample, i, kind)? {
                match cands.iter_mut().find(|c| c.kind == kind && c.range == range) {
                    Some(c) => c.slots.push(i),
                    None => cands.push(Cand {
                        range,
                        kind,
                        slots: vec![i],
                    }),
                }
            }
        }
    }
    cands.sort_by(|a, b| {
        a.range
            .start
            .cmp(&b.range.start)
            .then(b.range.end.cmp(&a.range.end))
            .then(a.kind.cmp(&b.kind))
    });

    let mut accepted: Vec<&Cand> = Vec::new();
    let mut skipped = Vec::new();
    for c in &cands {
        let clash = accepted
            .iter()
            .find(|a| a.range.start < c.range.end && c.range.start < a.range.end);
        match clash {
            Some(a) => skipped.push(format!(
                "{:?} {:?} overlaps {:?} {:?}; left untagged",
                c.kind,
                &sample.text[c.range.clone()],
                a.kind,
                &sample.text[a.range.clone()]
            )),
            None => accepted.push(c),
        }
    }

    let mut keys = vec![TripletKeys::default(); sample.gold.len()];
    let mut entries = Vec::with_capacity(accepted.len());
    let (mut n_a, mut n_o) = (0u32, 0u32);
    for c in accepted {
        let counter = match c.kind {
            TermKind::Aspect => &mut n_a,
            TermKind::Opinion => &mut n_o,
        };
        *counter += 1;
        let key = TagKey::new(c.kind, *counter);
        for &slot in &c.slots {
            keys[slot].set(c.kind, key);
        }
        entries.push((key, c.range.clone()));
    }
    let sentence = TaggedSentence::from_parts(sample.text.clone(), entries)
        .expect("accepted spans are disjoint and non-empty");
    Ok(TaggedSample {
        sentence,
        keys,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Lang, Polarity, Span, Triplet, TripletSpans};
    use crate::csw::{strip_tags, validate_tagged};

    fn t(a: &str, o: &str) -> Triplet {
        Triplet::new(a, o, Polarity::Positive).unwrap()
    }

    fn sample(text: &str, gold: Vec<Triplet>) -> Sample {
        Sample::new("s1", text, Lang::new("en").unwrap(), gold)
    }

    #[test]
    fn tags_in_span_order() {
        let s = sample("The great sushi was cheap", vec![t("sushi", "great"), t("sushi", "cheap")]);
        let tagged = tag_sample(&s).unwrap();
        assert_eq!(
            tagged.sentence.text(),
            "The <o1>great</o1> <a1>sushi</a1> was <o2>cheap</o2>"
        );
        assert_eq!(strip_tags(tagged.sentence.text()), s.text);
        assert_eq!(tagged.keys[0].aspect, tagged.keys[1].aspect);
        assert!(validate_tagged(tagged.sentence.text()).is_ok());
    }

    #[test]
    fn empty_gold_gives_plain_text() {
        let s = sample("nothing here", vec![]);
        assert_eq!(tag_sample(&s).unwrap().sentence.text(), "nothing here");
    }

    #[test]
    fn spans_take_precedence_over_search() {
        let mut s = sample("food and more food", vec![t("food", "more")]);
        s.spans = Some(vec![TripletSpans {
            aspect: vec![Span::new(14, 18)],
            opinion: vec![],
        }]);
        let tagged = tag_sample(&s).unwrap();
        assert_eq!(tagged.sentence.text(), "food and <o1>more</o1> <a1>food</a1>");
    }

    #[test]
    fn overlapping_spans_keep_the_earlier() {
        let s = sample("very good food", vec![t("good food", "very good")]);
        let tagged = tag_sample(&s).unwrap();
        assert_eq!(tagged.sentence.text(), "<o1>very good</o1> food");
        assert!(tagged.is_incomplete());
        assert_eq!(tagged.keys[0].aspect, None);
    }

    #[test]
    fn unlocatable_and_discontinuous_terms() {
        let s = sample("fine", vec![t("pizza", "fine")]);
        assert!(tag_sample(&s).is_err());
        let mut s = sample("not at all good", vec![t("", "not good")]);
        s.spans = Some(vec![TripletSpans {
            aspect: vec![],
            opinion: vec![Span::new(0, 3), Span::new(11, 15)],
        }]);
        assert!(tag_sample(&s).is_err());
    }
}
