//! Brute-force reference implementations used by the integration tests.
//! Nothing here calls into the library's vectorizer, metrics or objective.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn synthetic_corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic_en")
}

pub struct OracleVocab {
    pub terms: Vec<String>,
    pub df: Vec<u64>,
    pub idf: Vec<f64>,
    pub corpus_size: u64,
}

/// Every codepoint substring of length `lo..=hi`, materialized.
pub fn all_substrings(text: &str, lo: usize, hi: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for n in lo..=hi {
        if n > chars.len() {
            continue;
        }
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

fn multiset(text: &str, lo: usize, hi: usize) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for s in all_substrings(text, lo, hi) {
        *m.entry(s).or_insert(0) += 1;
    }
    m
}

/// `None` when every term is filtered out.
pub fn oracle_fit(
    docs: &[String],
    lo: usize,
    hi: usize,
    min_df: u64,
    max_features: Option<usize>,
) -> Option<OracleVocab> {
    let mut tf: BTreeMap<String, u64> = BTreeMap::new();
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for d in docs {
        for (term, c) in multiset(d, lo, hi) {
            *tf.entry(term.clone()).or_insert(0) += c;
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = tf.into_iter().filter(|(t, _)| df[t] >= min_df).collect();
    if let Some(cap) = max_features {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(cap);
    }
    if kept.is_empty() {
        return None;
    }
    let mut terms: Vec<String> = kept.into_iter().map(|(t, _)| t).collect();
    terms.sort();
    let n = docs.len() as u64;
    let dfs: Vec<u64> = terms.iter().map(|t| df[t]).collect();
    let idf = dfs
        .iter()
        .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Some(OracleVocab {
        terms,
        df: dfs,
        idf,
        corpus_size: n,
    })
}

/// Dense vector over the oracle vocabulary.
pub fn oracle_transform(doc: &str, vocab: &OracleVocab, lo: usize, hi: usize, tfidf: bool) -> Vec<f64> {
    let counts = multiset(doc, lo, hi);
    let mut v: Vec<f64> = vocab
        .terms
        .iter()
        .map(|t| counts.get(t).copied().unwrap_or(0) as f64)
        .collect();
    if tfidf {
        for (x, idf) in v.iter_mut().zip(&vocab.idf) {
            *x *= idf;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
    }
    v
}

/// (precision, recall, f1, accuracy) straight from the textbook formulas.
pub fn oracle_metrics(tp: f64, tn: f64, fp: f64, fn_: f64) -> (f64, f64, f64, f64) {
    let p = tp / (tp + fp);
    let r = tp / (tp + fn_);
    (p, r, 2.0 * p * r / (p + r), (tp + tn) / (tp + tn + fp + fn_))
}

/// Regularized objective on dense data, `theta = [w.., b]`, `y ∈ {−1, +1}`.
pub fn oracle_objective(x: &[Vec<f64>], y: &[f64], theta: &[f64], c: f64, logistic: bool) -> f64 {
    let d = theta.len() - 1;
    let reg = 0.5 * theta[..d].iter().map(|v| v * v).sum::<f64>();
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let z: f64 = xi.iter().zip(&theta[..d]).map(|(a, b)| a * b).sum::<f64>() + theta[d];
            let m = yi * z;
            if logistic {
                (1.0 + (-m).exp()).ln()
            } else {
                (1.0 - m).max(0.0).powi(2)
            }
        })
        .sum();
    reg + c * data
}

/// Central differences of `f` at `theta`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
