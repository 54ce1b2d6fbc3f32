//! Voting over candidate triplet lists.
//!
//! Two triplets *match* when their polarities agree and both directions of
//! the non-polar similarity reach the threshold. The support of a triplet
//! is the number of lists holding a match for it. Distinct triplets are
//! ranked by support, then total frequency, then length, then text, and a
//! greedy pass in rank order lets each surviving triplet suppress lower
//! ranked matches it never shares a list with (variants of the same
//! prediction). Survivors whose support reaches
//! `ceil(min_support_fraction * K)` are emitted, each as many times as it
//! appears in a single list at most, in order of first appearance.

use std::collections::HashMap;

use crate::corpus::Triplet;
use crate::metrics::{SingleSlotWeight, TokenizedTriplet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteConfig {
    pub threshold: f64,
    pub min_support_fraction: f64,
}

impl Default for VoteConfig {
    fn default() -> Self {
        VoteConfig {
            threshold: 0.5,
            min_support_fraction: 0.5,
        }
    }
}

struct Distinct<'a> {
    triplet: &'a Triplet,
    tok: TokenizedTriplet,
    /// Lists (by index) containing this exact triplet.
    lists: Vec<usize>,
    freq: usize,
    max_per_list: usize,
}

pub fn vote(lists: &[Vec<Triplet>], cfg: &VoteConfig) -> Vec<Triplet> {
    let k = lists.len();
    if k == 0 {
        return Vec::new();
    }
    let mut index: HashMap<&Triplet, usize> = HashMap::new();
    let mut items: Vec<Distinct> = Vec::new();
    for (li, list) in lists.iter().enumerate() {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for t in list {
            let i = *index.entry(t).or_insert_with(|| {
                items.push(Distinct {
                    triplet: t,
                    tok: TokenizedTriplet::from(t),
                    lists: Vec::new(),
                    freq: 0,
                    max_per_list: 0,
                });
                items.len() - 1
            });
            let it = &mut items[i];
            it.freq += 1;
            if it.lists.last() != Some(&li) {
                it.lists.push(li);
            }
            let c = counts.entry(i).or_default();
            *c += 1;
            it.max_per_list = it.max_per_list.max(*c);
        }
    }

    let n = items.len();
    let mut matches = vec![vec![false; n]; n];
    for i in 0..n {
        matches[i][i] = true;
        for j in i + 1..n {
            let (a, b) = (&items[i], &items[j]);
            let m = a.triplet.polarity == b.triplet.polarity && {
                let ab = a.tok.sim(&b.tok, true, SingleSlotWeight::Renormalize);
                let ba = b.tok.sim(&a.tok, true, SingleSlotWeight::Renormalize);
                ab.min(ba) >= cfg.threshold
            };
            matches[i][j] = m;
            matches[j][i] = m;
        }
    }

    let support: Vec<usize> = (0..n)
        .map(|i| {
            let mut hit = vec![false; k];
            for j in (0..n).filter(|&j| matches[i][j]) {
                for &l in &items[j].lists {
                    hit[l] = true;
                }
            }
            hit.into_iter().filter(|h| *h).count()
        })
        .collect();

    let len = |t: &Triplet| t.aspect.chars().count() + t.opinion.chars().count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (items[a].triplet, items[b].triplet);
        support[b]
            .cmp(&support[a])
            .then(items[b].freq.cmp(&items[a].freq))
            .then(len(tb).cmp(&len(ta)))
            .then_with(|| ta.cmp(tb))
    });

    let co_occur = |a: usize, b: usize| items[a].lists.iter().any(|l| items[b].lists.contains(l));
    let mut suppressed = vec![false; n];
    let mut winner = vec![false; n];
    for (r, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        winner[i] = true;
        for &j in &order[r + 1..] {
            if !suppressed[j] && matches[i][j] && !co_occur(i, j) {
                suppressed[j] = true;
            }
        }
    }

    let need = (cfg.min_support_fraction * k as f64 - 1e-9).ceil().max(0.0) as usize;
    let keep: Vec<bool> = (0..n).map(|i| winner[i] && support[i] >= need).collect();

    let mut emitted = vec![0usize; n];
    let mut out = Vec::new();
    for list in lists {
        for t in list {
            let i = index[t];
            if keep[i] && emitted[i] < items[i].max_per_list {
                emitted[i] += 1;
                out.push(t.clone());
            }
        }
    }
    out
}

/// Compare two triplet lists as multisets.
pub fn same_multiset(a: &[Triplet], b: &[Triplet]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Polarity;

    fn t(a: &str, o: &str, p: Polarity) -> Triplet {
        Triplet::new(a, o, p).unwrap()
    }

    #[test]
    fn single_list_is_returned_as_is() {
        let l = vec![
            t("food", "good", Polarity::Positive),
            t("food", "good", Polarity::Positive),
            t("good food", "good", Polarity::Positive),
        ];
        assert_eq!(vote(&[l.clone()], &VoteConfig::default()), l);
    }

    #[test]
    fn support_threshold() {
        let a = t("sushi", "great", Polarity::Positive);
        let b = t("staff", "rude", Polarity::Negative);
        let lists = vec![vec![a.clone(), b.clone()], vec![a.clone()], vec![]];
        assert_eq!(vote(&lists, &VoteConfig::default()), vec![a]);
    }

    #[test]
    fn variants_merge_into_the_best_supported() {
        let long = t("el sushi con cinta", "recomendable", Polarity::Positive);
        let short = t("el sushi", "recomendable", Polarity::Positive);
        let lists = vec![vec![long.clone()], vec![short.clone()], vec![short.clone()]];
        assert_eq!(vote(&lists, &VoteConfig::default()), vec![short]);
    }

    #[test]
    fn polarity_disagreement_never_merges() {
        let p = t("food", "ok", Polarity::Positive);
        let n = t("food", "ok", Polarity::Negative);
        let lists = vec![vec![p.clone()], vec![n.clone()]];
        let out = vote(&lists, &VoteConfig::default());
        assert_eq!(out, vec![p, n]);
    }

    #[test]
    fn unanimity() {
        let l = vec![t("a", "b", Polarity::Neutral), t("c", "d", Polarity::Positive)];
        let lists = vec![l.clone(); 4];
        assert_eq!(vote(&lists, &VoteConfig::default()), l);
    }
}
