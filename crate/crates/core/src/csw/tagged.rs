//! Sentences with inline term markup: `<a1>…</a1>` for the first aspect,
//! `<o2>…</o2>` for the second opinion, and so on.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TermKind;

/// Identifies one tagged term: kind plus 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TagKey {
    pub kind: TermKind,
    pub index: u32,
}

impl TagKey {
    pub fn new(kind: TermKind, index: u32) -> Self {
        TagKey { kind, index }
    }

    pub fn open(&self) -> String {
        format!("<{self}>")
    }

    pub fn close(&self) -> String {
        format!("</{self}>")
    }
}

impl fmt::Display for TagKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.tag_letter(), self.index)
    }
}

/// A sentence with term tags. `plain` is the sentence without markup and
/// `index` maps every tag to the byte range of its term in `plain`.
/// `text` is always the canonical rendering of `plain` + `index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    text: String,
    plain: String,
    index: BTreeMap<TagKey, Range<usize>>,
}

/// What tag repair had to do to a sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    /// A tag pair present in the reference sentence did not survive.
    pub lossy: bool,
    pub lost: Vec<TagKey>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("tag {0} is not closed")]
    Unclosed(String),
    #[error("closing tag {0} without an open tag")]
    UnmatchedClose(String),
    #[error("tags {0} and {1} cross")]
    Crossed(String, String),
    #[error("tag {0} used more than once")]
    Duplicate(String),
    #[error("malformed tag `{0}`")]
    Malformed(String),
    #[error("overlapping spans for {0} and {1}")]
    Overlap(String, String),
}

fn lenient_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<\s*(/?)\s*([aAoO])\s*(\d+)\s*>").unwrap())
}

fn any_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<\s*/?\s*[aAoO]\s*\d+\s*>").unwrap())
}

fn parse_key(kind: &str, index: &str) -> Option<TagKey> {
    let kind = match kind {
        "a" | "A" => TermKind::Aspect,
        _ => TermKind::Opinion,
    };
    let index: u32 = index.parse().ok()?;
    (index > 0).then_some(TagKey::new(kind, index))
}

/// Remove every term tag from `text`, leaving all other characters as-is.
pub fn strip_tags(text: &str) -> String {
    any_tag_re().replace_all(text, "").into_owned()
}

/// Strict check of canonical markup: only `<aK>`/`</aK>`/`<oK>`/`</oK>`
/// with K ≥ 1, balanced, non-crossing, each key used for one pair.
pub fn validate_tagged(text: &str) -> Result<(), TagError> {
    static STRICT: OnceLock<Regex> = OnceLock::new();
    let strict = STRICT.get_or_init(|| Regex::new(r"^<(/?)([ao])([1-9][0-9]*)>$").unwrap());
    let mut stack: Vec<TagKey> = Vec::new();
    let mut used = HashSet::new();
    for m in any_tag_re().find_iter(text) {
        let caps = strict
            .captures(m.as_str())
            .ok_or_else(|| TagError::Malformed(m.as_str().to_string()))?;
        let key = parse_key(&caps[2], &caps[3]).ok_or_else(|| TagError::Malformed(m.as_str().into()))?;
        if caps[1].is_empty() {
            if !used.insert(key) {
                return Err(TagError::Duplicate(key.to_string()));
            }
            stack.push(key);
        } else {
            match stack.pop() {
                Some(top) if top == key => {}
                Some(top) => return Err(TagError::Crossed(top.to_string(), key.to_string())),
                None => return Err(TagError::UnmatchedClose(key.to_string())),
            }
        }
    }
    match stack.pop() {
        Some(k) => Err(TagError::Unclosed(k.to_string())),
        None => Ok(()),
    }
}

fn trim_range(s: &str, r: Range<usize>) -> Range<usize> {
    let seg = &s[r.clone()];
    let lead = seg.len() - seg.trim_start().len();
    let trail = seg.len() - seg.trim_end().len();
    if lead == seg.len() {
        return r.start..r.start;
    }
    r.start + lead..r.end - trail
}

impl TaggedSentence {
    /// A sentence without any tags.
    pub fn untagged(plain: impl Into<String>) -> Self {
        let plain = plain.into();
        TaggedSentence {
            text: plain.clone(),
            plain,
            index: BTreeMap::new(),
        }
    }

    /// Build from a plain sentence and term ranges (byte offsets into
    /// `plain`). Ranges must be non-empty and either disjoint or nested.
    pub fn from_parts(
        plain: impl Into<String>,
        entries: impl IntoIterator<Item = (TagKey, Range<usize>)>,
    ) -> Result<Self, TagError> {
        let plain = plain.into();
        let index: BTreeMap<TagKey, Range<usize>> = entries.into_iter().collect();
        let sorted: Vec<(&TagKey, &Range<usize>)> = {
            let mut v: Vec<_> = index.iter().collect();
            v.sort_by(|a, b| a.1.start.cmp(&b.1.start).then(b.1.end.cmp(&a.1.end)));
            v
        };
        for w in sorted.windows(2) {
            let (ka, ra) = w[0];
            let (kb, rb) = w[1];
            if rb.start < ra.end && rb.end > ra.end {
                return Err(TagError::Overlap(ka.to_string(), kb.to_string()));
            }
        }
        for (k, r) in &index {
            if r.start >= r.end || r.end > plain.len() || !plain.is_char_boundary(r.start) || !plain.is_char_boundary(r.end) {
                return Err(TagError::Malformed(format!("{k} range {r:?}")));
            }
        }
        let text = render(&plain, &index);
        Ok(TaggedSentence { text, plain, index })
    }

    /// Parse possibly mangled markup (for example translator output),
    /// repairing what can be repaired. Tag names match case-insensitively
    /// and with whitespace inside the brackets. Unmatched, duplicated and
    /// crossing tags are dropped and noted.
    pub fn parse_lenient(raw: &str) -> (Self, RepairReport) {
        struct Tok {
            range: Range<usize>,
            close: bool,
            key: TagKey,
        }
        let mut report = RepairReport::default();
        let toks: Vec<Tok> = lenient_tag_re()
            .captures_iter(raw)
            .filter_map(|c| {
                let m = c.get(0).unwrap();
                match parse_key(&c[2], &c[3]) {
                    Some(key) => Some(Tok {
                        range: m.range(),
                        close: !c[1].is_empty(),
                        key,
                    }),
                    None => None,
                }
            })
            .collect();

        let mut stack: Vec<usize> = Vec::new();
        let mut completed: HashSet<TagKey> = HashSet::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (i, t) in toks.iter().enumerate() {
            if !t.close {
                let open_already = stack.iter().any(|&j| toks[j].key == t.key);
                if open_already || completed.contains(&t.key) {
                    report.notes.push(format!("duplicate <{}> dropped", t.key));
                } else {
                    stack.push(i);
                }
                continue;
            }
            match stack.iter().rposition(|&j| toks[j].key == t.key) {
                None => report.notes.push(format!("unmatched </{}> dropped", t.key)),
                Some(pos) => {
                    for &j in &stack[pos + 1..] {
                        report
                            .notes
                            .push(format!("<{}> crosses </{}>; dropped", toks[j].key, t.key));
                    }
                    pairs.push((stack[pos], i));
                    completed.insert(t.key);
                    stack.truncate(pos);
                }
            }
        }
        for &j in &stack {
            report.notes.push(format!("unclosed <{}> dropped", toks[j].key));
        }

        // Strip every tag token. Where removing a tag leaves two spaces
        // side by side, keep one.
        let mut plain = String::with_capacity(raw.len());
        let mut pos_of_tok = vec![0usize; toks.len()];
        let mut last = 0;
        for (i, t) in toks.iter().enumerate() {
            plain.push_str(&raw[last..t.range.start]);
            let next_is_ws = raw[t.range.end..].starts_with(char::is_whitespace);
            if next_is_ws && plain.ends_with(char::is_whitespace) {
                let ws = raw[t.range.end..].chars().next().unwrap();
                last = t.range.end + ws.len_utf8();
            } else {
                last = t.range.end;
            }
            pos_of_tok[i] = plain.len();
        }
        plain.push_str(&raw[last..]);

        let mut index = BTreeMap::new();
        for (o, c) in pairs {
            let key = toks[o].key;
            let r = trim_range(&plain, pos_of_tok[o]..pos_of_tok[c]);
            if r.is_empty() {
                report.notes.push(format!("<{key}> encloses no text; dropped"));
                continue;
            }
            index.insert(key, r);
        }
        let text = render(&plain, &index);
        (TaggedSentence { text, plain, index }, report)
    }

    /// Canonical tagged text.
    pub fn text(&self) -> &str {
        &self.text
    }

    /// The sentence without tags.
    pub fn plain(&self) -> &str {
        &self.plain
    }

    pub fn index(&self) -> &BTreeMap<TagKey, Range<usize>> {
        &self.index
    }

    pub fn keys(&self) -> impl Iterator<Item = TagKey> + '_ {
        self.index.keys().copied()
    }

    pub fn term(&self, key: TagKey) -> Option<&str> {
        self.index.get(&key).map(|r| &self.plain[r.clone()])
    }

    /// Re-parse `raw` and compare against this sentence's keys: every key
    /// of `self` missing from the result is reported as lost, and keys the
    /// result invented are dropped.
    pub fn repair_against(&self, raw: &str) -> (TaggedSentence, RepairReport) {
        let (mut out, mut report) = TaggedSentence::parse_lenient(raw);
        let extra: Vec<TagKey> = out.index.keys().filter(|k| !self.index.contains_key(k)).copied().collect();
        if !extra.is_empty() {
            for k in &extra {
                out.index.remove(k);
                report.notes.push(format!("<{k}> not in the source sentence; dropped"));
            }
            out.text = render(&out.plain, &out.index);
        }
        report.lost = self.index.keys().filter(|k| !out.index.contains_key(k)).copied().collect();
        report.lossy = !report.lost.is_empty();
        (out, report)
    }
}

fn render(plain: &str, index: &BTreeMap<TagKey, Range<usize>>) -> String {
    // (position, order, tag): at one position closes come first (inner
    // before outer), then opens (outer before inner).
    let mut events: Vec<(usize, u8, usize, String)> = Vec::with_capacity(index.len() * 2);
    for (k, r) in index {
        events.push((r.end, 0, r.end - r.start, k.close()));
        events.push((r.start, 1, usize::MAX - (r.end - r.start), k.open()));
    }
    events.sort();
    let mut out = String::with_capacity(plain.len() + events.len() * 5);
    let mut last = 0;
    for (pos, _, _, tag) in events {
        out.push_str(&plain[last..pos]);
        out.push_str(&tag);
        last = pos;
    }
    out.push_str(&plain[last..]);
    out
}
