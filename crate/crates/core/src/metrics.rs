//! Weighted-averaged precision, recall and F1 with partial credit for
//! word overlap between terms.
//!
//! Every predicted triplet is scored by its best-matching gold triplet
//! (precision), and every gold triplet by its best-matching prediction
//! (recall). A sample whose gold or predicted list is empty is scored as if
//! the list held the single empty triplet `("", "", NONE)`, so predicting
//! nothing for a sentence without annotations counts as an exact match.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Polarity, Triplet};
use crate::error::{Error, Result};
use crate::text::trim_punct;

/// How a triplet with exactly one non-empty term is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleSlotWeight {
    /// The remaining term carries the full weight: `overlap / len`.
    #[default]
    Renormalize,
    /// Keep the half weight of the two-term formula: `overlap / (2 len)`.
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub single_slot: SingleSlotWeight,
    /// Whether a sample with an empty gold list contributes its empty
    /// triplet to the recall sum and denominator.
    pub gold_empty_in_recall: bool,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            single_slot: SingleSlotWeight::Renormalize,
            gold_empty_in_recall: true,
        }
    }
}

/// Lowercased whitespace tokens with surrounding punctuation removed.
pub fn normalized_words(term: &str) -> Vec<String> {
    term.split_whitespace()
        .map(|w| trim_punct(w).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Size of the multiset intersection of the normalized words of `a` and `b`.
pub fn overlap(a: &str, b: &str) -> usize {
    overlap_words(&normalized_words(a), &normalized_words(b))
}

fn overlap_words(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in b {
        *counts.entry(w.as_str()).or_default() += 1;
    }
    let mut n = 0;
    for w in a {
        if let Some(c) = counts.get_mut(w.as_str()) {
            if *c > 0 {
                *c -= 1;
                n += 1;
            }
        }
    }
    n
}

/// Pre-tokenized triplet so repeated comparisons do not re-split strings.
#[derive(Debug, Clone)]
pub struct TokenizedTriplet {
    aspect: Vec<String>,
    opinion: Vec<String>,
    polarity: Polarity,
}

impl From<&Triplet> for TokenizedTriplet {
    fn from(t: &Triplet) -> Self {
        TokenizedTriplet {
            aspect: normalized_words(&t.aspect),
            opinion: normalized_words(&t.opinion),
            polarity: t.polarity,
        }
    }
}

impl TokenizedTriplet {
    fn is_blank(&self) -> bool {
        self.aspect.is_empty() && self.opinion.is_empty()
    }

    /// Similarity of `self` to `other`. Asymmetric: the term lengths of
    /// `self` are the denominators.
    pub fn sim(&self, other: &TokenizedTriplet, ignore_polarity: bool, weight: SingleSlotWeight) -> f64 {
        if !ignore_polarity && self.polarity != other.polarity {
            return 0.0;
        }
        let la = self.aspect.len();
        let lo = self.opinion.len();
        let single = |ov: usize, len: usize| match weight {
            SingleSlotWeight::Renormalize => ov as f64 / len as f64,
            SingleSlotWeight::Half => ov as f64 / (2 * len) as f64,
        };
        match (la, lo) {
            (0, 0) => {
                if other.is_blank() {
                    1.0
                } else {
                    0.0
                }
            }
            (0, _) => single(overlap_words(&self.opinion, &other.opinion), lo),
            (_, 0) => single(overlap_words(&self.aspect, &other.aspect), la),
            _ => {
                overlap_words(&self.opinion, &other.opinion) as f64 / (2 * lo) as f64
                    + overlap_words(&self.aspect, &other.aspect) as f64 / (2 * la) as f64
            }
        }
    }
}

/// Similarity between two triplets in `[0, 1]`.
pub fn sim(t1: &Triplet, t2: &Triplet, ignore_polarity: bool) -> f64 {
    sim_with(t1, t2, ignore_polarity, SingleSlotWeight::default())
}

pub fn sim_with(t1: &Triplet, t2: &Triplet, ignore_polarity: bool, weight: SingleSlotWeight) -> f64 {
    TokenizedTriplet::from(t1).sim(&TokenizedTriplet::from(t2), ignore_polarity, weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_sums(p_num: f64, p_den: usize, r_num: f64, r_den: usize) -> Self {
        let precision = if p_den == 0 { 0.0 } else { p_num / p_den as f64 };
        let recall = if r_den == 0 { 0.0 } else { r_num / r_den as f64 };
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "wP")]
    pub wp: f64,
    #[serde(rename = "wR")]
    pub wr: f64,
    #[serde(rename = "wF1")]
    pub wf1: f64,
    #[serde(rename = "NP_wP")]
    pub np_wp: f64,
    #[serde(rename = "NP_wR")]
    pub np_wr: f64,
    #[serde(rename = "NP_wF1")]
    pub np_wf1: f64,
    /// Precision denominator: predicted triplets after empty padding.
    pub n_pred_triplets: usize,
    /// Recall denominator: gold triplets after empty padding.
    pub n_gold_triplets: usize,
}

impl MetricsReport {
    pub fn polar(&self) -> Prf {
        Prf {
            precision: self.wp,
            recall: self.wr,
            f1: self.wf1,
        }
    }

    pub fn non_polar(&self) -> Prf {
        Prf {
            precision: self.np_wp,
            recall: self.np_wr,
            f1: self.np_wf1,
        }
    }
}

struct Sums {
    p_num: f64,
    p_den: usize,
    r_num: f64,
    r_den: usize,
}

fn accumulate(
    preds: &[Vec<Triplet>],
    golds: &[Vec<Triplet>],
    ignore_polarity: bool,
    opts: &MetricsOptions,
) -> Sums {
    let empty = TokenizedTriplet::from(&Triplet::empty());
    let mut s = Sums {
        p_num: 0.0,
        p_den: 0,
        r_num: 0.0,
        r_den: 0,
    };
    for (pred, gold) in preds.iter().zip(golds) {
        let pad = |v: &[Triplet]| -> Vec<TokenizedTriplet> {
            if v.is_empty() {
                vec![empty.clone()]
            } else {
                v.iter().map(TokenizedTriplet::from).collect()
            }
        };
        let p = pad(pred);
        let g = pad(gold);
        for t in &p {
            s.p_num += g
                .iter()
                .map(|x| t.sim(x, ignore_polarity, opts.single_slot))
                .fold(0.0, f64::max);
            s.p_den += 1;
        }
        if gold.is_empty() && !opts.gold_empty_in_recall {
            continue;
        }
        for t in &g {
            s.r_num += p
                .iter()
                .map(|x| t.sim(x, ignore_polarity, opts.single_slot))
                .fold(0.0, f64::max);
            s.r_den += 1;
        }
    }
    s
}

/// Weighted precision/recall/F1 for one polarity setting.
pub fn weighted_prf(
    preds: &[Vec<Triplet>],
    golds: &[Vec<Triplet>],
    ignore_polarity: bool,
    opts: &MetricsOptions,
) -> Result<Prf> {
    if preds.len() != golds.len() {
        return Err(Error::Invalid(format!(
            "{} prediction lists for {} gold lists",
            preds.len(),
            golds.len()
        )));
    }
    let s = accumulate(preds, golds, ignore_polarity, opts);
    Ok(Prf::from_sums(s.p_num, s.p_den, s.r_num, s.r_den))
}

/// Polar and non-polar scores for positionally aligned samples.
pub fn weighted_scores(
    preds: &[Vec<Triplet>],
    golds: &[Vec<Triplet>],
    opts: &MetricsOptions,
) -> Result<MetricsReport> {
    if preds.len() != golds.len() {
        return Err(Error::Invalid(format!(
            "{} prediction lists for {} gold lists",
            preds.len(),
            golds.len()
        )));
    }
    let polar = accumulate(preds, golds, false, opts);
    let np = accumulate(preds, golds, true, opts);
    let p = Prf::from_sums(polar.p_num, polar.p_den, polar.r_num, polar.r_den);
    let n = Prf::from_sums(np.p_num, np.p_den, np.r_num, np.r_den);
    Ok(MetricsReport {
        wp: p.precision,
        wr: p.recall,
        wf1: p.f1,
        np_wp: n.precision,
        np_wr: n.recall,
        np_wf1: n.f1,
        n_pred_triplets: polar.p_den,
        n_gold_triplets: polar.r_den,
    })
}

/// Score `(id, triplets)` predictions against a gold corpus. Every gold
/// sample needs exactly one prediction and vice versa.
pub fn score_against_corpus(
    predictions: &[(String, Vec<Triplet>)],
    gold: &Corpus,
    opts: &MetricsOptions,
) -> Result<MetricsReport> {
    let mut by_id: HashMap<&str, &Vec<Triplet>> = HashMap::with_capacity(predictions.len());
    for (id, trips) in predictions {
        if by_id.insert(id.as_str(), trips).is_some() {
            return Err(Error::Invalid(format!("duplicate prediction for id `{id}`")));
        }
    }
    if by_id.len() != gold.samples.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} gold samples",
            by_id.len(),
            gold.samples.len()
        )));
    }
    let mut preds = Vec::with_capacity(gold.samples.len());
    let mut golds = Vec::with_capacity(gold.samples.len());
    for s in &gold.samples {
        let p = by_id
            .get(s.id.as_str())
            .ok_or_else(|| Error::Invalid(format!("no prediction for gold id `{}`", s.id)))?;
        preds.push((*p).clone());
        golds.push(s.gold.clone());
    }
    weighted_scores(&preds, &golds, opts)
}

/// Score the trivial system that predicts an empty list for every sample.
pub fn all_null_baseline(corpus: &Corpus, opts: &MetricsOptions) -> MetricsReport {
    let preds = vec![Vec::new(); corpus.samples.len()];
    let golds: Vec<Vec<Triplet>> = corpus.samples.iter().map(|s| s.gold.clone()).collect();
    weighted_scores(&preds, &golds, opts).expect("lengths match by construction")
}

/// Human-readable table, values ×100 with one decimal.
pub fn render_table(rows: &[(String, MetricsReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(7).max(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} | {:>5} {:>5} {:>5} | {:>6} {:>6} {:>6}",
        "dataset", "wP", "wR", "wF1", "NP-wP", "NP-wR", "NP-wF1"
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 45));
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$} | {:>5.1} {:>5.1} {:>5.1} | {:>6.1} {:>6.1} {:>6.1}",
            name,
            r.wp * 100.0,
            r.wr * 100.0,
            r.wf1 * 100.0,
            r.np_wp * 100.0,
            r.np_wr * 100.0,
            r.np_wf1 * 100.0
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Lang, Sample, Split};

    fn t(a: &str, o: &str, p: Polarity) -> Triplet {
        Triplet::new(a, o, p).unwrap()
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap("el sushi", "el sushi con cinta transportadora"), 2);
        assert_eq!(overlap("the the food", "the food, the"), 3);
        assert_eq!(overlap("", "anything"), 0);
        assert_eq!(overlap("Great!", "great"), 1);
    }

    #[test]
    fn sim_is_asymmetric() {
        let pred = t("el sushi", "recomendable", Polarity::Positive);
        let gold = t("el sushi con cinta transportadora", "recomendable", Polarity::Positive);
        assert_eq!(sim(&pred, &gold, false), 1.0);
        assert!((sim(&gold, &pred, false) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn polarity_gate() {
        let a = t("food", "good", Polarity::Positive);
        let b = t("food", "good", Polarity::Negative);
        assert_eq!(sim(&a, &b, false), 0.0);
        assert_eq!(sim(&a, &b, true), 1.0);
    }

    #[test]
    fn single_slot_weighting() {
        let a = t("", "muy bueno", Polarity::Positive);
        let b = t("hotel", "bueno", Polarity::Positive);
        assert_eq!(sim(&a, &b, false), 0.5);
        assert_eq!(sim_with(&a, &b, false, SingleSlotWeight::Half), 0.25);
        let e = Triplet::empty();
        assert_eq!(sim(&e, &e, false), 1.0);
        assert_eq!(sim(&e, &b, true), 0.0);
    }

    #[test]
    fn two_prediction_example() {
        let gold = t("el sushi con cinta transportadora", "recomendable", Polarity::Positive);
        let p1 = t("el sushi", "recomendable", Polarity::Positive);
        let p2 = t("el sushi", "muy bueno", Polarity::Positive);
        assert_eq!(sim(&p2, &gold, false), 0.5);
        let r = weighted_scores(&[vec![p1, p2]], &[vec![gold]], &MetricsOptions::default()).unwrap();
        assert!((r.wp - 0.75).abs() < 1e-12);
        assert!((r.wr - 0.7).abs() < 1e-12);
        assert!((r.wf1 - 1.05 / 1.45).abs() < 1e-12);
        assert_eq!(r.n_pred_triplets, 2);
        assert_eq!(r.n_gold_triplets, 1);
    }

    #[test]
    fn perfect_prediction() {
        let g = vec![
            vec![t("a b", "c", Polarity::Positive)],
            vec![],
            vec![t("", "x", Polarity::Neutral), t("y", "", Polarity::Negative)],
        ];
        let r = weighted_scores(&g, &g, &MetricsOptions::default()).unwrap();
        assert_eq!((r.wp, r.wr, r.wf1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_null_on_unannotated_corpus_is_perfect() {
        let es = Lang::new("es").unwrap();
        let mut c = Corpus::new("c", es.clone(), Split::Test);
        c.samples = (0..3).map(|i| Sample::new(i.to_string(), "x", es.clone(), vec![])).collect();
        let r = all_null_baseline(&c, &MetricsOptions::default());
        assert_eq!((r.wp, r.wr, r.wf1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_null_precision_equals_empty_rate() {
        let es = Lang::new("es").unwrap();
        let mut c = Corpus::new("c", es.clone(), Split::Test);
        c.samples.push(Sample::new("1", "x", es.clone(), vec![]));
        c.samples.push(Sample::new(
            "2",
            "x",
            es.clone(),
            vec![t("a", "b", Polarity::Positive), t("c", "d", Polarity::Negative)],
        ));
        let r = all_null_baseline(&c, &MetricsOptions::default());
        assert_eq!(r.wp, 0.5);
        assert!((r.wr - 1.0 / 3.0).abs() < 1e-12);
        let no_gold_pad = MetricsOptions {
            gold_empty_in_recall: false,
            ..MetricsOptions::default()
        };
        assert_eq!(all_null_baseline(&c, &no_gold_pad).wr, 0.0);
    }

    #[test]
    fn id_mismatch_is_an_error() {
        let es = Lang::new("es").unwrap();
        let mut c = Corpus::new("c", es.clone(), Split::Test);
        c.samples.push(Sample::new("1", "x", es, vec![]));
        let preds = vec![("2".to_string(), vec![])];
        assert!(score_against_corpus(&preds, &c, &MetricsOptions::default()).is_err());
    }
}
