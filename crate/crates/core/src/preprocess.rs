//! Tweet normalization: an author's tweets become one lowercase token stream.
//!
//! Steps, in execution order: concatenate tweets, collapse whitespace,
//! replace numbers and emojis with placeholders, delete irrelevant signs,
//! squeeze repeated characters, tokenize, then lowercase and drop short
//! tokens and stopwords. Short-token and stopword removal run after
//! tokenization since they operate on tokens.

use std::collections::HashSet;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorDocument, Corpus, Language};

pub const URL: &str = "#URL#";
pub const HASHTAG: &str = "#HASHTAG#";
pub const USER: &str = "#USER#";
pub const NUMBER: &str = "#NUMBER#";
pub const EMOJI: &str = "#EMOJI#";
pub const PLACEHOLDERS: [&str; 5] = [URL, HASHTAG, USER, NUMBER, EMOJI];

pub const DEFAULT_DELETION_SET: &str = "+*/\\|~^=<>{}[]()";

/// Tokens shorter than this (in codepoints) are dropped; placeholders are exempt.
pub const MIN_TOKEN_CHARS: usize = 3;

const VARIATION_SELECTOR_16: char = '\u{FE0F}';
const ZERO_WIDTH_JOINER: char = '\u{200D}';

pub fn is_placeholder(token: &str) -> bool {
    PLACEHOLDERS.contains(&token)
}

/// Emoji codepoint classifier shared by preprocessing and corpus statistics.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF
        | 0x1F600..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F900..=0x1F9FF
        | 0x2600..=0x27BF)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    language: Language,
    words: HashSet<String>,
}

static STOPWORDS_EN: LazyLock<StopwordList> =
    LazyLock::new(|| StopwordList::parse(Language::En, include_str!("../resources/stopwords_en.txt")));
static STOPWORDS_ES: LazyLock<StopwordList> =
    LazyLock::new(|| StopwordList::parse(Language::Es, include_str!("../resources/stopwords_es.txt")));

impl StopwordList {
    /// The vendored list for `language`.
    pub fn bundled(language: Language) -> &'static StopwordList {
        match language {
            Language::En => &STOPWORDS_EN,
            Language::Es => &STOPWORDS_ES,
        }
    }

    /// One word per line, `#` starts a comment line, blank lines ignored.
    pub fn parse(language: Language, text: &str) -> StopwordList {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordList { language, words }
    }

    pub fn empty(language: Language) -> StopwordList {
        StopwordList {
            language,
            words: HashSet::new(),
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub author_id: String,
    pub tokens: Vec<String>,
    /// Tokens joined by single spaces; the surface character n-grams read.
    pub joined_text: String,
}

impl TokenStream {
    pub fn new(author_id: impl Into<String>, tokens: Vec<String>) -> TokenStream {
        let joined_text = tokens.join(" ");
        TokenStream {
            author_id: author_id.into(),
            tokens,
            joined_text,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn concatenate_tweets(doc: &AuthorDocument) -> String {
    doc.tweets.join(" ")
}

pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

static NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:[.,]\d+)*").unwrap());

/// Digit runs (with `.`/`,` group separators) become `#NUMBER#`, emoji
/// codepoints become `#EMOJI#`. A U+FE0F or U+200D directly after an emoji is
/// absorbed into its placeholder.
pub fn replace_numbers_and_emojis(text: &str) -> String {
    let numbered = NUMBER_RE.replace_all(text, NUMBER);
    let mut out = String::with_capacity(numbered.len());
    let mut after_emoji = false;
    for c in numbered.chars() {
        if is_emoji(c) {
            out.push_str(EMOJI);
            after_emoji = true;
        } else if after_emoji && (c == VARIATION_SELECTOR_16 || c == ZERO_WIDTH_JOINER) {
            continue;
        } else {
            out.push(c);
            after_emoji = false;
        }
    }
    out
}

pub fn strip_irrelevant_signs(text: &str, deletion_set: &[char]) -> String {
    text.chars().filter(|c| !deletion_set.contains(c)).collect()
}

/// Shortens every run of one repeated character to at most two.
pub fn squeeze_repeats(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev = None;
    let mut run = 0usize;
    for c in text.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

// Alternatives are tried in order at each position.
static TOKEN_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"(?x)
        \#(?:URL|HASHTAG|USER|NUMBER|EMOJI)\#
        | <3
        | [<>]?[:;=][-o*']?[)\](\[dDpP/:}{@|\\]
        | [^\W\d_](?:(?:[^\W\d_]|['’\-_])*[^\W\d_])?
        | \w+
        | \.{2,}
        | \S
        "#,
    )
    .unwrap()
});

/// Twitter-aware tokenization. Placeholders, emoticons and words with
/// internal apostrophes or hyphens stay whole; other punctuation characters
/// become single-character tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    TOKEN_RE.find_iter(text).map(|m| m.as_str().to_string()).collect()
}

/// Lowercases non-placeholder tokens, then drops those shorter than three
/// codepoints and stopwords. Runs of three identical characters that only
/// appear after case folding (`"aAA"`) are squeezed again.
pub fn filter_and_lowercase(tokens: &[String], stopwords: &StopwordList) -> Vec<String> {
    tokens
        .iter()
        .filter_map(|token| {
            if is_placeholder(token) {
                return Some(token.clone());
            }
            let lowered = squeeze_repeats(&token.to_lowercase());
            if lowered.chars().count() < MIN_TOKEN_CHARS || stopwords.contains(&lowered) {
                None
            } else {
                Some(lowered)
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: StopwordList,
    deletion_set: Vec<char>,
}

impl Preprocessor {
    pub fn new(language: Language) -> Preprocessor {
        Preprocessor::with_stopwords(StopwordList::bundled(language).clone())
    }

    pub fn with_stopwords(stopwords: StopwordList) -> Preprocessor {
        Preprocessor {
            stopwords,
            deletion_set: DEFAULT_DELETION_SET.chars().collect(),
        }
    }

    /// Replaces the set of characters deleted as irrelevant signs. `#` is
    /// always kept so placeholders survive.
    pub fn deletion_set(mut self, signs: &str) -> Preprocessor {
        self.deletion_set = signs.chars().filter(|&c| c != '#').collect();
        self
    }

    pub fn stopwords(&self) -> &StopwordList {
        &self.stopwords
    }

    pub fn process_text(&self, text: &str) -> Vec<String> {
        let text = normalize_whitespace(text);
        let text = replace_numbers_and_emojis(&text);
        let text = strip_irrelevant_signs(&text, &self.deletion_set);
        let text = squeeze_repeats(&text);
        filter_and_lowercase(&tokenize(&text), &self.stopwords)
    }

    pub fn process(&self, doc: &AuthorDocument) -> TokenStream {
        TokenStream::new(doc.author_id.clone(), self.process_text(&concatenate_tweets(doc)))
    }

    /// Processes every author in parallel; output keeps corpus order.
    pub fn process_corpus(&self, corpus: &Corpus) -> Vec<TokenStream> {
        corpus.authors().par_iter().map(|a| self.process(a)).collect()
    }
}

/// Full pipeline with the default sign deletion set.
pub fn preprocess_author(doc: &AuthorDocument, stopwords: &StopwordList) -> TokenStream {
    Preprocessor::with_stopwords(stopwords.clone()).process(doc)
}
