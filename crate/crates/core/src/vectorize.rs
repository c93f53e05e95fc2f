//! N-gram vocabularies and sparse document vectors.
//!
//! TF-IDF weighting uses the smoothed inverse document frequency
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1` followed by L2 normalization of
//! each document vector. Count weighting keeps raw occurrence counts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::TokenStream;

pub const MAX_NGRAM: usize = 16;
pub const MAX_FEATURES_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    /// Codepoint n-grams over the space-joined token stream.
    Char,
    /// N-grams of whole tokens.
    WordToken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    TfIdf,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NgramRange {
    min_n: usize,
    max_n: usize,
}

impl NgramRange {
    pub fn new(min_n: usize, max_n: usize) -> Result<NgramRange> {
        if min_n == 0 || min_n > max_n || max_n > MAX_NGRAM {
            return Err(Error::InvalidConfig(format!(
                "invalid n-gram range [{min_n};{max_n}] (need 1 <= min <= max <= {MAX_NGRAM})"
            )));
        }
        Ok(NgramRange { min_n, max_n })
    }

    pub fn min_n(&self) -> usize {
        self.min_n
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }
}

impl fmt::Display for NgramRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.min_n, self.max_n)
    }
}

impl FromStr for NgramRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<NgramRange> {
        let bad = || Error::InvalidConfig(format!("invalid n-gram range {s:?}"));
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let (a, b) = s.split_once(['-', ';', ',']).ok_or_else(bad)?;
        NgramRange::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub weighting: Weighting,
    pub analyzer: Analyzer,
    pub range: NgramRange,
    pub max_features: Option<usize>,
    pub min_df: usize,
}

impl VectorizerConfig {
    pub fn char_tfidf(min_n: usize, max_n: usize, max_features: Option<usize>) -> VectorizerConfig {
        VectorizerConfig {
            weighting: Weighting::TfIdf,
            analyzer: Analyzer::Char,
            range: NgramRange::new(min_n, max_n).expect("valid range"),
            max_features,
            min_df: 1,
        }
    }

    pub fn char_count(min_n: usize, max_n: usize, max_features: Option<usize>) -> VectorizerConfig {
        VectorizerConfig {
            weighting: Weighting::Count,
            ..VectorizerConfig::char_tfidf(min_n, max_n, max_features)
        }
    }

    pub fn with_min_df(mut self, min_df: usize) -> VectorizerConfig {
        self.min_df = min_df;
        self
    }

    pub fn validate(&self) -> Result<()> {
        NgramRange::new(self.range.min_n, self.range.max_n)?;
        if self.min_df == 0 {
            return Err(Error::InvalidConfig("min_df must be >= 1".into()));
        }
        if let Some(k) = self.max_features {
            if k == 0 || k > MAX_FEATURES_LIMIT {
                return Err(Error::InvalidConfig(format!(
                    "max_features {k} outside [1; {MAX_FEATURES_LIMIT}]"
                )));
            }
        }
        Ok(())
    }
}

/// Compact form used on the command line and in reports:
/// `tfidf/char/1-3/3000/1` (weighting/analyzer/range/max_features/min_df),
/// with `all` for an uncapped vocabulary.
impl fmt::Display for VectorizerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let weighting = match self.weighting {
            Weighting::TfIdf => "tfidf",
            Weighting::Count => "count",
        };
        let analyzer = match self.analyzer {
            Analyzer::Char => "char",
            Analyzer::WordToken => "word",
        };
        let cap = self.max_features.map_or_else(|| "all".to_string(), |k| k.to_string());
        write!(f, "{weighting}/{analyzer}/{}/{cap}/{}", self.range, self.min_df)
    }
}

impl FromStr for VectorizerConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<VectorizerConfig> {
        let bad = |why: &str| Error::InvalidConfig(format!("invalid vectorizer {s:?}: {why}"));
        let parts: Vec<&str> = s.trim().split('/').collect();
        if parts.len() < 3 || parts.len() > 5 {
            return Err(bad("expected weighting/analyzer/range[/max_features[/min_df]]"));
        }
        let weighting = match parts[0] {
            "tfidf" => Weighting::TfIdf,
            "count" => Weighting::Count,
            _ => return Err(bad("weighting must be tfidf or count")),
        };
        let analyzer = match parts[1] {
            "char" => Analyzer::Char,
            "word" => Analyzer::WordToken,
            _ => return Err(bad("analyzer must be char or word")),
        };
        let range = parts[2].parse()?;
        let max_features = match parts.get(3).copied() {
            None | Some("all") => None,
            Some(k) => Some(k.parse().map_err(|_| bad("max_features"))?),
        };
        let min_df = match parts.get(4) {
            None => 1,
            Some(m) => m.parse().map_err(|_| bad("min_df"))?,
        };
        let config = VectorizerConfig {
            weighting,
            analyzer,
            range,
            max_features,
            min_df,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dimension: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dimension: usize, entries: Vec<(usize, f64)>) -> Result<SparseVector> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidConfig("sparse indices must strictly increase".into()));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: i + 1,
                });
            }
        }
        Ok(SparseVector {
            dimension,
            entries: entries.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    pub fn zeros(dimension: usize) -> SparseVector {
        SparseVector {
            dimension,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(values: &[f64]) -> SparseVector {
        SparseVector {
            dimension: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// Concatenates two feature blocks: `b`'s indices shift by `a.dimension()`.
pub fn feature_union(a: &SparseVector, b: &SparseVector) -> SparseVector {
    let offset = a.dimension;
    let mut entries = Vec::with_capacity(a.nnz() + b.nnz());
    entries.extend_from_slice(&a.entries);
    entries.extend(b.entries.iter().map(|&(i, v)| (i + offset, v)));
    SparseVector {
        dimension: a.dimension + b.dimension,
        entries,
    }
}

/// Counts n-grams of `text`, borrowing each n-gram as a slice.
fn count_char_ngrams(text: &str, range: NgramRange) -> HashMap<&str, u32> {
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    bounds.push(text.len());
    let chars = bounds.len() - 1;
    let mut counts = HashMap::new();
    for n in range.min_n..=range.max_n.min(chars) {
        for start in 0..=chars - n {
            *counts.entry(&text[bounds[start]..bounds[start + n]]).or_insert(0) += 1;
        }
    }
    counts
}

/// Counts token n-grams as slices of the joined text.
fn count_word_ngrams(stream: &TokenStream, range: NgramRange) -> HashMap<&str, u32> {
    let text = stream.joined_text.as_str();
    let mut spans = Vec::with_capacity(stream.tokens.len());
    let mut pos = 0;
    for token in &stream.tokens {
        spans.push((pos, pos + token.len()));
        pos += token.len() + 1;
    }
    let mut counts = HashMap::new();
    for n in range.min_n..=range.max_n.min(spans.len()) {
        for start in 0..=spans.len() - n {
            let slice = &text[spans[start].0..spans[start + n - 1].1];
            *counts.entry(slice).or_insert(0) += 1;
        }
    }
    counts
}

fn count_ngrams<'a>(stream: &'a TokenStream, config: &VectorizerConfig) -> HashMap<&'a str, u32> {
    match config.analyzer {
        Analyzer::Char => count_char_ngrams(&stream.joined_text, config.range),
        Analyzer::WordToken => count_word_ngrams(stream, config.range),
    }
}

/// Multiset of codepoint n-grams of `text` for every n in `range`.
pub fn extract_char_ngrams(text: &str, range: NgramRange) -> BTreeMap<String, usize> {
    count_char_ngrams(text, range)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v as usize))
        .collect()
}

pub fn smooth_idf(corpus_size: u64, document_frequency: u64) -> f64 {
    ((1.0 + corpus_size as f64) / (1.0 + document_frequency as f64)).ln() + 1.0
}

/// A fitted n-gram vocabulary. Indices are dense and follow lexicographic
/// term order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    config: VectorizerConfig,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<u64>,
    corpus_size: u64,
    idf: Option<Vec<f64>>,
}

impl Vocabulary {
    pub fn fit(streams: &[TokenStream], config: VectorizerConfig) -> Result<Vocabulary> {
        config.validate()?;
        if streams.is_empty() {
            return Err(Error::EmptyInput("no documents to fit a vocabulary on"));
        }
        if config.min_df > streams.len() {
            return Err(Error::InvalidConfig(format!(
                "min_df {} exceeds corpus size {}",
                config.min_df,
                streams.len()
            )));
        }

        let per_doc: Vec<HashMap<&str, u32>> = streams.par_iter().map(|s| count_ngrams(s, &config)).collect();
        let mut totals: HashMap<&str, (u64, u64)> = HashMap::new();
        for counts in &per_doc {
            for (&term, &c) in counts {
                let e = totals.entry(term).or_insert((0, 0));
                e.0 += c as u64;
                e.1 += 1;
            }
        }

        let mut kept: Vec<(&str, u64, u64)> = totals
            .into_iter()
            .filter(|&(_, (_, df))| df >= config.min_df as u64)
            .map(|(t, (tf, df))| (t, tf, df))
            .collect();
        if let Some(cap) = config.max_features {
            if kept.len() > cap {
                kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                kept.truncate(cap);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_unstable_by(|a, b| a.0.cmp(b.0));

        let corpus_size = streams.len() as u64;
        let terms: Vec<String> = kept.iter().map(|k| k.0.to_string()).collect();
        let document_frequency: Vec<u64> = kept.iter().map(|k| k.2).collect();
        Vocabulary::from_parts(config, terms, document_frequency, corpus_size)
    }

    /// Rebuilds a vocabulary from stored terms and document frequencies.
    /// IDF values are recomputed.
    pub fn from_parts(
        config: VectorizerConfig,
        terms: Vec<String>,
        document_frequency: Vec<u64>,
        corpus_size: u64,
    ) -> Result<Vocabulary> {
        config.validate()?;
        if terms.len() != document_frequency.len() {
            return Err(Error::LengthMismatch {
                left: terms.len(),
                right: document_frequency.len(),
            });
        }
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("vocabulary terms must be strictly sorted".into()));
        }
        if let Some(cap) = config.max_features {
            if terms.len() > cap {
                return Err(Error::InvalidConfig(format!(
                    "{} terms exceed max_features {cap}",
                    terms.len()
                )));
            }
        }
        if document_frequency
            .iter()
            .any(|&df| df < config.min_df as u64 || df > corpus_size)
        {
            return Err(Error::InvalidConfig("document frequency out of range".into()));
        }
        let idf = match config.weighting {
            Weighting::TfIdf => Some(
                document_frequency
                    .iter()
                    .map(|&df| smooth_idf(corpus_size, df))
                    .collect(),
            ),
            Weighting::Count => None,
        };
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary {
            config,
            terms,
            index,
            document_frequency,
            corpus_size,
            idf,
        })
    }

    pub fn config(&self) -> &VectorizerConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self) -> &[u64] {
        &self.document_frequency
    }

    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    pub fn idf(&self) -> Option<&[f64]> {
        self.idf.as_deref()
    }

    pub fn transform(&self, stream: &TokenStream) -> SparseVector {
        let mut entries: Vec<(usize, f64)> = count_ngrams(stream, &self.config)
            .into_iter()
            .filter_map(|(term, c)| self.index.get(term).map(|&i| (i, c as f64)))
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        if let Some(idf) = &self.idf {
            for e in &mut entries {
                e.1 *= idf[e.0];
            }
            let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            if norm > 0.0 {
                for e in &mut entries {
                    e.1 /= norm;
                }
            }
        }
        SparseVector {
            dimension: self.terms.len(),
            entries,
        }
    }
}

pub fn fit_vocabulary(streams: &[TokenStream], config: VectorizerConfig) -> Result<Vocabulary> {
    Vocabulary::fit(streams, config)
}

pub fn transform(stream: &TokenStream, vocab: &Vocabulary) -> SparseVector {
    vocab.transform(stream)
}

/// One or more fitted vocabularies whose vectors are concatenated in order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    blocks: Vec<Vocabulary>,
}

impl FeatureSpace {
    pub fn fit(streams: &[TokenStream], configs: &[VectorizerConfig]) -> Result<FeatureSpace> {
        if configs.is_empty() {
            return Err(Error::InvalidConfig("at least one vectorizer is required".into()));
        }
        let blocks = configs
            .iter()
            .map(|c| Vocabulary::fit(streams, *c))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureSpace { blocks })
    }

    pub fn from_blocks(blocks: Vec<Vocabulary>) -> Result<FeatureSpace> {
        if blocks.is_empty() {
            return Err(Error::InvalidConfig("at least one vectorizer is required".into()));
        }
        Ok(FeatureSpace { blocks })
    }

    pub fn blocks(&self) -> &[Vocabulary] {
        &self.blocks
    }

    pub fn configs(&self) -> Vec<VectorizerConfig> {
        self.blocks.iter().map(|b| *b.config()).collect()
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(Vocabulary::len).sum()
    }

    pub fn transform(&self, stream: &TokenStream) -> SparseVector {
        let mut blocks = self.blocks.iter();
        let first = blocks.next().expect("non-empty").transform(stream);
        blocks.fold(first, |acc, b| feature_union(&acc, &b.transform(stream)))
    }

    pub fn transform_all(&self, streams: &[TokenStream]) -> Vec<SparseVector> {
        streams.par_iter().map(|s| self.transform(s)).collect()
    }
}
