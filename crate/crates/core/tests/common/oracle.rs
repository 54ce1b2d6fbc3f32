//! Brute-force reference for the weighted overlap metrics. Written
//! independently of `ttcsw::metrics`: words are matched one by one with a
//! consumed-flag table, every (predicted, gold) pair gets a similarity in a
//! dense matrix, and row/column maxima are read off the matrix.

use ttcsw::corpus::{Polarity, Triplet};

fn words(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in s.split(|c: char| c.is_whitespace()) {
        let lower: String = raw.chars().flat_map(|c| c.to_lowercase()).collect();
        let chars: Vec<char> = lower.chars().collect();
        let mut lo = 0;
        let mut hi = chars.len();
        while lo < hi && !chars[lo].is_alphanumeric() {
            lo += 1;
        }
        while hi > lo && !chars[hi - 1].is_alphanumeric() {
            hi -= 1;
        }
        if lo < hi {
            out.push(chars[lo..hi].iter().collect());
        }
    }
    out
}

fn overlap(a: &str, b: &str) -> usize {
    let wa = words(a);
    let wb = words(b);
    let mut used = vec![false; wb.len()];
    let mut n = 0;
    for x in &wa {
        for (j, y) in wb.iter().enumerate() {
            if !used[j] && x == y {
                used[j] = true;
                n += 1;
                break;
            }
        }
    }
    n
}

pub fn sim(t1: &Triplet, t2: &Triplet, ignore_polarity: bool) -> f64 {
    if !ignore_polarity && t1.polarity != t2.polarity {
        return 0.0;
    }
    let la = words(&t1.aspect).len() as f64;
    let lo = words(&t1.opinion).len() as f64;
    let other_empty = words(&t2.aspect).is_empty() && words(&t2.opinion).is_empty();
    if la == 0.0 && lo == 0.0 {
        return if other_empty { 1.0 } else { 0.0 };
    }
    if la > 0.0 && lo > 0.0 {
        return overlap(&t1.opinion, &t2.opinion) as f64 / (2.0 * lo)
            + overlap(&t1.aspect, &t2.aspect) as f64 / (2.0 * la);
    }
    if la > 0.0 {
        overlap(&t1.aspect, &t2.aspect) as f64 / la
    } else {
        overlap(&t1.opinion, &t2.opinion) as f64 / lo
    }
}

pub struct OracleScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn scores(preds: &[Vec<Triplet>], golds: &[Vec<Triplet>], ignore_polarity: bool) -> OracleScores {
    assert_eq!(preds.len(), golds.len());
    let pad = |v: &Vec<Triplet>| -> Vec<Triplet> {
        if v.is_empty() {
            vec![Triplet {
                aspect: String::new(),
                opinion: String::new(),
                polarity: Polarity::NonePolar,
            }]
        } else {
            v.clone()
        }
    };
    let (mut p_num, mut p_den, mut r_num, mut r_den) = (0.0, 0usize, 0.0, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        let p = pad(p);
        let g = pad(g);
        let forward: Vec<Vec<f64>> = p
            .iter()
            .map(|x| g.iter().map(|y| sim(x, y, ignore_polarity)).collect())
            .collect();
        let backward: Vec<Vec<f64>> = g
            .iter()
            .map(|y| p.iter().map(|x| sim(y, x, ignore_polarity)).collect())
            .collect();
        for row in &forward {
            p_num += row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            p_den += 1;
        }
        for row in &backward {
            r_num += row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            r_den += 1;
        }
    }
    let precision = if p_den == 0 { 0.0 } else { p_num / p_den as f64 };
    let recall = if r_den == 0 { 0.0 } else { r_num / r_den as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    OracleScores { precision, recall, f1 }
}
