//! PAN-format corpus ingestion.
//!
//! A corpus directory holds one `<author_id>.xml` file per Twitter account and
//! an optional `truth.txt` mapping author ids to class labels:
//!
//! ```text
//! <author lang="en">
//!   <documents>
//!     <document><![CDATA[RT #USER#: tweet text #URL#]]></document>
//!     ...
//!   </documents>
//! </author>
//! ```
//!
//! Truth lines have the shape `<author_id>:::<label>` where label `1` marks a
//! fake-news spreader and `0` a credible user.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRUTH_FILE: &str = "truth.txt";
pub const TRUTH_SEPARATOR: &str = ":::";
/// Tweets per author in conformant PAN data.
pub const EXPECTED_TWEETS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Es,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "es" => Ok(Language::Es),
            other => Err(Error::InvalidConfig(format!("unknown language {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    TrueNewsSpreader = 0,
    FakeNewsSpreader = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::TrueNewsSpreader, Label::FakeNewsSpreader];

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::TrueNewsSpreader),
            1 => Some(Label::FakeNewsSpreader),
            _ => None,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::TrueNewsSpreader => Label::FakeNewsSpreader,
            Label::FakeNewsSpreader => Label::TrueNewsSpreader,
        }
    }

    /// +1 for fake-news spreaders, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::TrueNewsSpreader => -1.0,
            Label::FakeNewsSpreader => 1.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Label::TrueNewsSpreader => "True",
            Label::FakeNewsSpreader => "Fake",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorDocument {
    pub author_id: String,
    pub tweets: Vec<String>,
    pub label: Option<Label>,
}

impl AuthorDocument {
    pub fn new(author_id: impl Into<String>, tweets: Vec<String>, label: Option<Label>) -> Result<Self> {
        let author_id = author_id.into();
        validate_author_id(&author_id)?;
        if tweets.is_empty() {
            return Err(Error::EmptyAuthor { author_id });
        }
        Ok(AuthorDocument {
            author_id,
            tweets,
            label,
        })
    }
}

pub fn validate_author_id(id: &str) -> Result<()> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(Error::InvalidAuthorId(id.to_string()));
    }
    Ok(())
}

/// An immutable set of authors in one language, ordered by author id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    language: Language,
    authors: Vec<AuthorDocument>,
}

impl Corpus {
    pub fn new(language: Language, mut authors: Vec<AuthorDocument>) -> Result<Self> {
        authors.sort_by(|a, b| a.author_id.cmp(&b.author_id));
        for pair in authors.windows(2) {
            if pair[0].author_id == pair[1].author_id {
                return Err(Error::DuplicateAuthorId(pair[0].author_id.clone()));
            }
        }
        let labeled = authors.iter().filter(|a| a.label.is_some()).count();
        if labeled != 0 && labeled != authors.len() {
            return Err(Error::MixedLabeling);
        }
        Ok(Corpus { language, authors })
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn authors(&self) -> &[AuthorDocument] {
        &self.authors
    }

    pub fn len(&self) -> usize {
        self.authors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.authors.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.authors.is_empty() && self.authors.iter().all(|a| a.label.is_some())
    }

    /// Labels in author order. Fails unless every author is labeled.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.authors
            .iter()
            .map(|a| a.label.ok_or(Error::UnlabeledCorpus))
            .collect()
    }

    /// `[true_news_count, fake_news_count]`
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for label in self.authors.iter().filter_map(|a| a.label) {
            counts[label as usize] += 1;
        }
        counts
    }

    pub fn get(&self, author_id: &str) -> Option<&AuthorDocument> {
        self.authors
            .binary_search_by(|a| a.author_id.as_str().cmp(author_id))
            .ok()
            .map(|i| &self.authors[i])
    }

    /// Keeps the authors accepted by `keep`, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&AuthorDocument) -> bool) -> Corpus {
        Corpus {
            language: self.language,
            authors: self.authors.iter().filter(|a| keep(a)).cloned().collect(),
        }
    }

    pub fn into_authors(self) -> Vec<AuthorDocument> {
        self.authors
    }
}

/// Parses one author file. `author_id` is the caller-supplied file stem.
pub fn parse_author_xml(raw: &[u8], author_id: &str) -> Result<AuthorDocument> {
    validate_author_id(author_id)?;
    let text = std::str::from_utf8(raw).map_err(|e| Error::MalformedXml {
        file: None,
        message: e.to_string(),
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::MalformedXml {
        file: None,
        message: e.to_string(),
    })?;
    let tweets: Vec<String> = doc
        .descendants()
        .filter(|n| n.has_tag_name("document"))
        .filter(|n| n.parent_element().is_some_and(|p| p.has_tag_name("documents")))
        .map(|n| n.children().filter_map(|c| c.text()).collect::<String>())
        .collect();
    AuthorDocument::new(author_id, tweets, None)
}

/// Renders an author in the PAN XML layout. Tweets go into CDATA sections;
/// any `]]>` inside a tweet is split across two sections and carriage
/// returns are written as character references (parsers normalize them
/// away inside CDATA).
pub fn author_to_xml(doc: &AuthorDocument, language: Language) -> String {
    let mut out = String::with_capacity(doc.tweets.iter().map(|t| t.len() + 40).sum::<usize>() + 64);
    out.push_str(&format!("<author lang=\"{}\">\n\t<documents>\n", language.code()));
    for tweet in &doc.tweets {
        out.push_str("\t\t<document><![CDATA[");
        out.push_str(
            &tweet
                .replace("]]>", "]]]]><![CDATA[>")
                .replace('\r', "]]>&#13;<![CDATA["),
        );
        out.push_str("]]></document>\n");
    }
    out.push_str("\t</documents>\n</author>\n");
    out
}

pub fn parse_truth_file(text: &str) -> Result<BTreeMap<String, Label>> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let malformed = |message: String| Error::MalformedTruthLine { line: line_no, message };
        let (id, label) = line
            .split_once(TRUTH_SEPARATOR)
            .ok_or_else(|| malformed(format!("missing {TRUTH_SEPARATOR:?} separator")))?;
        validate_author_id(id).map_err(|_| malformed(format!("invalid author id {id:?}")))?;
        let label = match label {
            "0" => Label::TrueNewsSpreader,
            "1" => Label::FakeNewsSpreader,
            other => return Err(malformed(format!("label must be 0 or 1, got {other:?}"))),
        };
        if map.insert(id.to_string(), label).is_some() {
            return Err(Error::DuplicateAuthorId(id.to_string()));
        }
    }
    Ok(map)
}

/// Formats `(author_id, label)` pairs as truth-file lines.
pub fn format_truth<'a>(entries: impl IntoIterator<Item = (&'a str, Label)>) -> String {
    let mut out = String::new();
    for (id, label) in entries {
        out.push_str(id);
        out.push_str(TRUTH_SEPARATOR);
        out.push_str(&label.to_string());
        out.push('\n');
    }
    out
}

/// A non-fatal observation made while loading data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadDiagnostic {
    UnexpectedTweetCount { author_id: String, count: usize },
}

impl fmt::Display for LoadDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadDiagnostic::UnexpectedTweetCount { author_id, count } => {
                write!(f, "author {author_id} has {count} tweets (expected {EXPECTED_TWEETS})")
            }
        }
    }
}

pub fn load_corpus(dir: impl AsRef<Path>, language: Language) -> Result<Corpus> {
    load_corpus_with_diagnostics(dir, language).map(|(c, _)| c)
}

pub fn load_corpus_with_diagnostics(
    dir: impl AsRef<Path>,
    language: Language,
) -> Result<(Corpus, Vec<LoadDiagnostic>)> {
    let dir = dir.as_ref();
    let mut xml_files: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "xml") {
            xml_files.push(path);
        }
    }
    xml_files.sort();

    let mut authors = xml_files
        .par_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::InvalidAuthorId(path.display().to_string()))?;
            let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_author_xml(&raw, stem).map_err(|e| match e {
                Error::MalformedXml { message, .. } => Error::MalformedXml {
                    file: Some(path.clone()),
                    message,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let truth_path = dir.join(TRUTH_FILE);
    if truth_path.is_file() {
        let text = fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
        let truth = parse_truth_file(&text)?;
        let present: HashSet<&str> = authors.iter().map(|a| a.author_id.as_str()).collect();
        if let Some(missing) = truth.keys().find(|id| !present.contains(id.as_str())) {
            return Err(Error::MissingAuthorFile(missing.clone()));
        }
        for author in &mut authors {
            author.label = Some(
                *truth
                    .get(&author.author_id)
                    .ok_or_else(|| Error::UnlabeledAuthor(author.author_id.clone()))?,
            );
        }
    }

    let corpus = Corpus::new(language, authors)?;
    let diagnostics: Vec<LoadDiagnostic> = corpus
        .authors()
        .iter()
        .filter(|a| a.tweets.len() != EXPECTED_TWEETS)
        .map(|a| LoadDiagnostic::UnexpectedTweetCount {
            author_id: a.author_id.clone(),
            count: a.tweets.len(),
        })
        .collect();
    for d in &diagnostics {
        log::warn!("{d}");
    }
    Ok((corpus, diagnostics))
}

/// Writes a corpus in the PAN directory layout (plus `truth.txt` when labeled).
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for author in corpus.authors() {
        let path = dir.join(format!("{}.xml", author.author_id));
        fs::write(&path, author_to_xml(author, corpus.language())).map_err(|e| Error::io(&path, e))?;
    }
    if corpus.is_labeled() {
        let truth = format_truth(
            corpus
                .authors()
                .iter()
                .map(|a| (a.author_id.as_str(), a.label.expect("labeled"))),
        );
        let path = dir.join(TRUTH_FILE);
        fs::write(&path, truth).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Train fraction as an exact ratio plus shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_numerator: u64,
    pub train_denominator: u64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_numerator: 7,
            train_denominator: 10,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn new(train_numerator: u64, train_denominator: u64, seed: u64) -> Result<Self> {
        if train_denominator == 0 || train_numerator == 0 || train_numerator >= train_denominator {
            return Err(Error::InvalidConfig(format!(
                "train fraction {train_numerator}/{train_denominator} must lie strictly between 0 and 1"
            )));
        }
        Ok(SplitSpec {
            train_numerator,
            train_denominator,
            seed,
        })
    }

    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..Default::default()
        }
    }

    /// Parses `"7/10"` or a decimal such as `"0.7"` exactly.
    pub fn parse_fraction(text: &str, seed: u64) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("invalid train fraction {text:?}"));
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return SplitSpec::new(n, d, seed);
        }
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if !int.trim_start_matches('0').is_empty() || frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let numerator: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let denominator = 10u64.pow(frac.len() as u32);
        let g = gcd(numerator.max(1), denominator);
        SplitSpec::new(numerator / g, denominator / g, seed)
    }

    pub fn train_count(&self, class_count: usize) -> usize {
        ((class_count as u128 * self.train_numerator as u128) / self.train_denominator as u128) as usize
    }

    pub fn fraction(&self) -> f64 {
        self.train_numerator as f64 / self.train_denominator as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Authors grouped by class, each group shuffled by the seeded generator.
fn shuffled_classes(corpus: &Corpus, seed: u64) -> Result<[Vec<&AuthorDocument>; 2]> {
    if corpus.is_empty() || !corpus.is_labeled() {
        return Err(Error::UnlabeledCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: [Vec<&AuthorDocument>; 2] = [Vec::new(), Vec::new()];
    for a in corpus.authors() {
        classes[a.label.expect("labeled") as usize].push(a);
    }
    for class in &mut classes {
        class.shuffle(&mut rng);
    }
    Ok(classes)
}

/// Stratified, seeded train/test split. Per class, `floor(count × fraction)`
/// authors go to train and the rest to test.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    let classes = shuffled_classes(corpus, spec.seed)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, members) in Label::ALL.iter().zip(&classes) {
        if members.is_empty() {
            continue;
        }
        let n_train = spec.train_count(members.len());
        if n_train == 0 {
            return Err(Error::DegenerateSplit(format!(
                "class {label} ({} authors) gets no training authors",
                members.len()
            )));
        }
        train.extend(members[..n_train].iter().map(|a| (*a).clone()));
        test.extend(members[n_train..].iter().map(|a| (*a).clone()));
    }
    if test.is_empty() {
        return Err(Error::DegenerateSplit("test split is empty".into()));
    }
    Ok((
        Corpus::new(corpus.language(), train)?,
        Corpus::new(corpus.language(), test)?,
    ))
}

/// Stratified k-fold partition: returns `(train, test)` pairs, one per fold.
pub fn stratified_folds(corpus: &Corpus, folds: usize, seed: u64) -> Result<Vec<(Corpus, Corpus)>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("k-fold needs k >= 2, got {folds}")));
    }
    let classes = shuffled_classes(corpus, seed)?;
    if classes.iter().any(|c| !c.is_empty() && c.len() < folds) {
        return Err(Error::DegenerateSplit(format!(
            "a class has fewer than {folds} authors"
        )));
    }
    let mut assignment: BTreeMap<&str, usize> = BTreeMap::new();
    for members in &classes {
        for (i, a) in members.iter().enumerate() {
            assignment.insert(a.author_id.as_str(), i % folds);
        }
    }
    (0..folds)
        .map(|k| {
            let train = corpus.filter(|a| assignment[a.author_id.as_str()] != k);
            let test = corpus.filter(|a| assignment[a.author_id.as_str()] == k);
            Ok((train, test))
        })
        .collect()
}
