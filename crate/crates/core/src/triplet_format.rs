//! The generation target format:
//! `(aspect<split>opinion<split>POS) <join> (aspect<split>opinion<split>NEG)`.
//!
//! Emission is canonical. Parsing is total: any text produces a (possibly
//! empty) triplet list, and everything that had to be dropped or repaired
//! is counted in [`ParseDiagnostics`].

use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, Triplet};

pub const SPLIT: &str = "<split>";
pub const JOIN: &str = "<join>";

/// Whether `term` contains one of the two reserved tokens.
pub fn contains_reserved(term: &str) -> bool {
    term.contains(SPLIT) || term.contains(JOIN)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub dropped_triplets: usize,
    pub repaired_triplets: usize,
    pub notes: Vec<String>,
}

impl ParseDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.dropped_triplets == 0 && self.repaired_triplets == 0
    }

    fn drop(&mut self, segment: &str, why: &str) {
        self.dropped_triplets += 1;
        self.notes.push(format!("dropped `{segment}`: {why}"));
    }

    fn repair(&mut self, segment: &str, why: &str) {
        self.repaired_triplets += 1;
        self.notes.push(format!("repaired `{segment}`: {why}"));
    }
}

pub fn emit_triplet(t: &Triplet) -> String {
    format!("({}{SPLIT}{}{SPLIT}{})", t.aspect, t.opinion, t.polarity.code())
}

/// Serialize a triplet list. The empty list serializes to `""`.
pub fn emit_triplets(triplets: &[Triplet]) -> String {
    triplets
        .iter()
        .map(emit_triplet)
        .collect::<Vec<_>>()
        .join(&format!(" {JOIN} "))
}

/// Parse model output back into triplets.
pub fn parse_triplets(text: &str) -> (Vec<Triplet>, ParseDiagnostics) {
    let mut diags = ParseDiagnostics::default();
    let mut out = Vec::new();
    if text.trim().is_empty() {
        return (out, diags);
    }
    for raw in text.split(JOIN) {
        let segment = raw.trim();
        if segment.is_empty() {
            diags.drop(raw, "empty segment");
            continue;
        }
        let inner = strip_parens(segment);
        let fields: Vec<&str> = inner.split(SPLIT).map(str::trim).collect();
        let (aspect, opinion, label) = match fields.len() {
            3 => (fields[0].to_string(), fields[1].to_string(), fields[2]),
            n if n > 3 => {
                diags.repair(segment, "extra fields folded into the opinion");
                (fields[0].to_string(), fields[1..n - 1].join(" "), fields[n - 1])
            }
            2 => {
                diags.drop(segment, "polarity missing");
                continue;
            }
            _ => {
                diags.drop(segment, "no field separators");
                continue;
            }
        };
        let polarity = match label.parse::<Polarity>() {
            Ok(p) => p,
            Err(e) => {
                diags.drop(segment, &e.to_string());
                continue;
            }
        };
        match Triplet::new(aspect, opinion, polarity) {
            Ok(t) => out.push(t),
            Err(e) => diags.drop(segment, &e.to_string()),
        }
    }
    (out, diags)
}

fn strip_parens(s: &str) -> &str {
    match s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner,
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: &str, o: &str, p: Polarity) -> Triplet {
        Triplet::new(a, o, p).unwrap()
    }

    #[test]
    fn emits_two_triplets_in_canonical_shape() {
        let s = emit_triplets(&[
            t("a1", "o1", Polarity::Positive),
            t("a2", "o2", Polarity::Negative),
        ]);
        assert_eq!(s, "(a1<split>o1<split>POS) <join> (a2<split>o2<split>NEG)");
    }

    #[test]
    fn empty_list_is_empty_string() {
        assert_eq!(emit_triplets(&[]), "");
        assert_eq!(parse_triplets(""), (vec![], ParseDiagnostics::default()));
        assert_eq!(parse_triplets("  \n "), (vec![], ParseDiagnostics::default()));
    }

    #[test]
    fn punctuation_inside_terms_is_verbatim() {
        let trip = t("(the) rice, noodles", "good; cheap", Polarity::Neutral);
        let s = emit_triplets(std::slice::from_ref(&trip));
        assert_eq!(s, "((the) rice, noodles<split>good; cheap<split>NEU)");
        let (back, d) = parse_triplets(&s);
        assert_eq!(back, vec![trip]);
        assert!(d.is_clean());
    }

    #[test]
    fn parses_figure_style_output() {
        let (v, d) = parse_triplets("(el sushi<split>recomendable<split>POS)");
        assert_eq!(v, vec![t("el sushi", "recomendable", Polarity::Positive)]);
        assert!(d.is_clean());
    }

    #[test]
    fn garbage_is_one_dropped_triplet() {
        let (v, d) = parse_triplets("garbage text with no tokens");
        assert!(v.is_empty());
        assert_eq!(d.dropped_triplets, 1);
        assert!(!d.notes.is_empty());
    }

    #[test]
    fn whitespace_around_tokens_is_tolerated() {
        let (v, d) = parse_triplets("  ( food <split> tasty <split> pos )<join>(staff<split>rude<split>NEG)  ");
        assert_eq!(
            v,
            vec![t("food", "tasty", Polarity::Positive), t("staff", "rude", Polarity::Negative)]
        );
        assert!(d.is_clean());
    }

    #[test]
    fn repair_and_drop_rules() {
        let (v, d) = parse_triplets(
            "(a<split>b<split>c<split>POS) <join> (x<split>y) <join> (p<split>q<split>GREAT)",
        );
        assert_eq!(v, vec![t("a", "b c", Polarity::Positive)]);
        assert_eq!(d.repaired_triplets, 1);
        assert_eq!(d.dropped_triplets, 2);
        assert_eq!(d.notes.len(), 3);
    }

    #[test]
    fn empty_triplet_round_trips() {
        let s = emit_triplets(&[Triplet::empty()]);
        assert_eq!(s, "(<split><split>NONE)");
        assert_eq!(parse_triplets(&s).0, vec![Triplet::empty()]);
        let (v, d) = parse_triplets("(<split><split>POS)");
        assert!(v.is_empty());
        assert_eq!(d.dropped_triplets, 1);
    }
}
