//! Per-class token statistics over raw (unpreprocessed) tweets.
//!
//! Definitions:
//! - tokens are whitespace-delimited;
//! - a retweet is a tweet whose first token is `RT`;
//! - an uppercased token has at least two characters, all uppercase letters;
//! - an uppercased phrase is a run of two or more consecutive uppercased
//!   tokens within one tweet, counted once per run;
//! - placeholder counts are occurrences of `#URL#`, `#HASHTAG#`, `#USER#`
//!   anywhere in the text.
//!
//! Sentiment and named-entity rows are not computed and render as
//! `n/a (out of scope)`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{AuthorDocument, Corpus, Label};
use crate::error::{Error, Result};
use crate::preprocess::{is_emoji, HASHTAG, URL, USER};

/// Mergeable accumulator for one class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassStats {
    tokens: BTreeSet<String>,
    emojis: BTreeSet<char>,
    pub emojis_total: u64,
    pub url_tokens: u64,
    pub hashtag_tokens: u64,
    pub user_tokens: u64,
    pub retweets: u64,
    pub uppercased_tokens_total: u64,
    pub uppercased_phrases_total: u64,
}

fn is_uppercased(token: &str) -> bool {
    token.chars().count() >= 2 && token.chars().all(|c| c.is_alphabetic() && c.is_uppercase())
}

impl ClassStats {
    pub fn unique_tokens(&self) -> u64 {
        self.tokens.len() as u64
    }

    pub fn emojis_unique(&self) -> u64 {
        self.emojis.len() as u64
    }

    pub fn add_tweet(&mut self, tweet: &str) {
        let tokens: Vec<&str> = tweet.split_whitespace().collect();
        if tokens.first() == Some(&"RT") {
            self.retweets += 1;
        }
        let mut run = 0;
        for token in &tokens {
            self.tokens.insert((*token).to_string());
            if is_uppercased(token) {
                self.uppercased_tokens_total += 1;
                run += 1;
                if run == 2 {
                    self.uppercased_phrases_total += 1;
                }
            } else {
                run = 0;
            }
        }
        for c in tweet.chars().filter(|&c| is_emoji(c)) {
            self.emojis_total += 1;
            self.emojis.insert(c);
        }
        self.url_tokens += tweet.matches(URL).count() as u64;
        self.hashtag_tokens += tweet.matches(HASHTAG).count() as u64;
        self.user_tokens += tweet.matches(USER).count() as u64;
    }

    pub fn add_author(&mut self, author: &AuthorDocument) {
        for tweet in &author.tweets {
            self.add_tweet(tweet);
        }
    }

    pub fn merge(&mut self, other: &ClassStats) {
        self.tokens.extend(other.tokens.iter().cloned());
        self.emojis.extend(other.emojis.iter().copied());
        self.emojis_total += other.emojis_total;
        self.url_tokens += other.url_tokens;
        self.hashtag_tokens += other.hashtag_tokens;
        self.user_tokens += other.user_tokens;
        self.retweets += other.retweets;
        self.uppercased_tokens_total += other.uppercased_tokens_total;
        self.uppercased_phrases_total += other.uppercased_phrases_total;
    }

    pub fn summary(&self) -> ClassSummary {
        ClassSummary {
            unique_tokens: self.unique_tokens(),
            emojis_total: self.emojis_total,
            emojis_unique: self.emojis_unique(),
            url_tokens: self.url_tokens,
            hashtag_tokens: self.hashtag_tokens,
            user_tokens: self.user_tokens,
            retweets: self.retweets,
            uppercased_tokens_total: self.uppercased_tokens_total,
            uppercased_phrases_total: self.uppercased_phrases_total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub unique_tokens: u64,
    pub emojis_total: u64,
    pub emojis_unique: u64,
    pub url_tokens: u64,
    pub hashtag_tokens: u64,
    pub user_tokens: u64,
    pub retweets: u64,
    pub uppercased_tokens_total: u64,
    pub uppercased_phrases_total: u64,
}

/// Statistics indexed by label: `[true_news, fake_news]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub classes: [ClassStats; 2],
}

impl CorpusStats {
    pub fn class(&self, label: Label) -> &ClassStats {
        &self.classes[label as usize]
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        for (a, b) in self.classes.iter_mut().zip(&other.classes) {
            a.merge(b);
        }
    }
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    let mut stats = CorpusStats::default();
    for author in corpus.authors() {
        let label = author.label.ok_or(Error::UnlabeledCorpus)?;
        stats.classes[label as usize].add_author(author);
    }
    Ok(stats)
}

const OUT_OF_SCOPE: &str = "n/a (out of scope)";

/// Two-column (True/Fake) aligned table, one row per statistic.
pub fn render_stats(stats: &CorpusStats) -> String {
    let t = stats.class(Label::TrueNewsSpreader).summary();
    let f = stats.class(Label::FakeNewsSpreader).summary();
    let num = |v: u64| Some(group_thousands(v));
    let rows: Vec<(&str, Option<String>, Option<String>)> = vec![
        ("Unique Tokens", num(t.unique_tokens), num(f.unique_tokens)),
        ("Emojis Total", num(t.emojis_total), num(f.emojis_total)),
        ("Emojis Unique", num(t.emojis_unique), num(f.emojis_unique)),
        ("Neutral Tweets", None, None),
        ("Positive Tweets", None, None),
        ("Negative Tweets", None, None),
        (
            "Uppercased Tokens Total",
            num(t.uppercased_tokens_total),
            num(f.uppercased_tokens_total),
        ),
        (
            "Uppercased Phrases Total",
            num(t.uppercased_phrases_total),
            num(f.uppercased_phrases_total),
        ),
        ("#URL# Token", num(t.url_tokens), num(f.url_tokens)),
        ("#HASHTAG# Token", num(t.hashtag_tokens), num(f.hashtag_tokens)),
        ("#USER# Token", num(t.user_tokens), num(f.user_tokens)),
        ("Retweets (RT)", num(t.retweets), num(f.retweets)),
        ("NER ORG", None, None),
        ("NER PERSON", None, None),
        ("NER LOC", None, None),
    ];
    let cell = |v: &Option<String>| v.clone().unwrap_or_else(|| OUT_OF_SCOPE.to_string());
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Features".len());
    let w1 = rows.iter().map(|r| cell(&r.1).len()).max().unwrap_or(0).max(4);
    let w2 = rows.iter().map(|r| cell(&r.2).len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}", "Features", "True", "Fake");
    let _ = writeln!(out, "{}", "-".repeat(w0 + w1 + w2 + 4));
    for (name, a, b) in &rows {
        let _ = writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}", name, cell(a), cell(b));
    }
    out
}

fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Language;

    #[test]
    fn hand_counted_class() {
        let mut s = ClassStats::default();
        s.add_tweet("RT #USER#: GO NOW");
        s.add_tweet("ok 😀😀");
        assert_eq!(s.retweets, 1);
        assert_eq!(s.user_tokens, 1);
        assert_eq!(s.emojis_total, 2);
        assert_eq!(s.emojis_unique(), 1);
        assert_eq!(s.uppercased_tokens_total, 3);
        assert_eq!(s.uppercased_phrases_total, 1);
        assert_eq!(s.unique_tokens(), 6);
    }

    #[test]
    fn phrase_runs() {
        let mut s = ClassStats::default();
        s.add_tweet("WE ARE HERE and NOW IS it A B");
        // runs: WE ARE HERE / NOW IS; "A" and "B" are single letters
        assert_eq!(s.uppercased_phrases_total, 2);
        assert_eq!(s.uppercased_tokens_total, 5);
        let mut split = ClassStats::default();
        split.add_tweet("end GO");
        split.add_tweet("NOW start");
        assert_eq!(split.uppercased_phrases_total, 0);
    }

    #[test]
    fn empty_class_is_zero() {
        let a = AuthorDocument::new("a", vec!["x".into()], Some(Label::TrueNewsSpreader)).unwrap();
        let stats = corpus_stats(&Corpus::new(Language::En, vec![a]).unwrap()).unwrap();
        assert_eq!(stats.class(Label::FakeNewsSpreader), &ClassStats::default());
    }

    #[test]
    fn unlabeled_rejected() {
        let a = AuthorDocument::new("a", vec!["x".into()], None).unwrap();
        assert!(corpus_stats(&Corpus::new(Language::En, vec![a]).unwrap()).is_err());
    }

    #[test]
    fn table_shape() {
        let table = render_stats(&CorpusStats::default());
        assert_eq!(table.lines().count(), 17);
        assert!(table.contains("NER LOC"));
        assert!(table.contains(OUT_OF_SCOPE));
        assert_eq!(group_thousands(1234567), "1,234,567");
        assert_eq!(group_thousands(999), "999");
    }
}
