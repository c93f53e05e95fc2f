//! Seeded generator for small PAN-format corpora with an injected class signal.
//!
//! Both classes draw most words from one shared pool. Each class also has
//! its own leaning vocabulary and habits: credible users retweet and mention
//! more often, spreaders post more links and shouted words.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AuthorDocument, Corpus, Label, Language};
use crate::error::Result;

const SHARED: &[&str] = &[
    "people",
    "today",
    "time",
    "world",
    "country",
    "government",
    "president",
    "state",
    "city",
    "week",
    "year",
    "family",
    "money",
    "market",
    "team",
    "game",
    "school",
    "health",
    "police",
    "water",
    "music",
    "movie",
    "friends",
    "photo",
    "morning",
    "night",
    "weekend",
    "party",
    "vote",
    "campaign",
    "leader",
    "media",
    "story",
    "video",
    "post",
    "twitter",
    "watch",
    "think",
    "know",
    "going",
    "great",
    "good",
    "better",
    "love",
    "need",
    "want",
    "look",
    "work",
    "happy",
    "life",
    "best",
    "never",
    "always",
    "really",
    "still",
    "right",
    "something",
    "nothing",
    "every",
    "another",
    "change",
    "public",
    "support",
    "question",
    "answer",
    "company",
    "business",
    "power",
    "future",
    "history",
    "place",
    "street",
    "house",
    "home",
    "minutes",
];

const TRUE_LEANING: &[&str] = &[
    "report",
    "study",
    "analysis",
    "official",
    "research",
    "data",
    "update",
    "according",
    "survey",
    "statement",
    "announced",
    "percent",
    "economy",
    "scientists",
    "conference",
    "published",
    "interview",
    "evidence",
    "reporters",
    "committee",
    "budget",
    "forecast",
    "measures",
    "article",
    "journal",
    "agency",
    "investigation",
    "review",
    "results",
    "quarterly",
];

const FAKE_LEANING: &[&str] = &[
    "shocking",
    "exposed",
    "secret",
    "hoax",
    "banned",
    "miracle",
    "truth",
    "unbelievable",
    "cover",
    "elites",
    "hidden",
    "outrage",
    "insane",
    "destroyed",
    "leaked",
    "bombshell",
    "scandal",
    "conspiracy",
    "wake",
    "censored",
    "viral",
    "urgent",
    "revealed",
    "busted",
    "rigged",
    "traitor",
    "slams",
    "fraud",
    "cure",
    "share",
];

const EMOJIS: &[char] = &['😀', '😂', '😍', '🔥', '👍', '🙏', '😡', '😱', '❤', '🎉'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub authors_per_class: usize,
    pub tweets_per_author: usize,
    pub seed: u64,
    pub language: Language,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            authors_per_class: 60,
            tweets_per_author: 100,
            seed: 2020,
            language: Language::En,
        }
    }
}

struct Habits {
    own: &'static [&'static str],
    other: &'static [&'static str],
    own_rate: f64,
    retweet: f64,
    mention: f64,
    hashtag: f64,
    url: f64,
    shout: f64,
    emoji: f64,
}

fn habits(label: Label) -> Habits {
    match label {
        Label::TrueNewsSpreader => Habits {
            own: TRUE_LEANING,
            other: FAKE_LEANING,
            own_rate: 0.12,
            retweet: 0.25,
            mention: 0.30,
            hashtag: 0.30,
            url: 0.45,
            shout: 0.04,
            emoji: 0.10,
        },
        Label::FakeNewsSpreader => Habits {
            own: FAKE_LEANING,
            other: TRUE_LEANING,
            own_rate: 0.12,
            retweet: 0.12,
            mention: 0.15,
            hashtag: 0.15,
            url: 0.60,
            shout: 0.10,
            emoji: 0.05,
        },
    }
}

fn tweet(rng: &mut ChaCha8Rng, h: &Habits) -> String {
    let mut words: Vec<String> = Vec::new();
    if rng.gen_bool(h.retweet) {
        words.push("RT".into());
        words.push("#USER#:".into());
    }
    let len = rng.gen_range(5..=12);
    for _ in 0..len {
        let r: f64 = rng.gen();
        let pool = if r < h.own_rate {
            h.own
        } else if r < h.own_rate + 0.04 {
            h.other
        } else {
            SHARED
        };
        let mut word = pool.choose(rng).expect("non-empty pool").to_string();
        if rng.gen_bool(h.shout) {
            word = word.to_uppercase();
        } else if words.is_empty() {
            word[..1].make_ascii_uppercase();
        }
        words.push(word);
        if rng.gen_bool(0.03) {
            words.push(rng.gen_range(1..500).to_string());
        }
    }
    if rng.gen_bool(h.mention) {
        words.push("#USER#".into());
    }
    if rng.gen_bool(h.hashtag) {
        words.push("#HASHTAG#".into());
    }
    if rng.gen_bool(h.emoji) {
        words.push(EMOJIS.choose(rng).expect("non-empty").to_string());
    }
    if rng.gen_bool(h.url) {
        words.push("#URL#".into());
    }
    words.join(" ")
}

fn author_id(rng: &mut ChaCha8Rng) -> String {
    format!("{:016x}{:016x}", rng.gen::<u64>(), rng.gen::<u64>())
}

pub fn generate(spec: &SyntheticSpec) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut authors = Vec::with_capacity(2 * spec.authors_per_class);
    for i in 0..2 * spec.authors_per_class {
        let label = if i % 2 == 0 {
            Label::TrueNewsSpreader
        } else {
            Label::FakeNewsSpreader
        };
        let h = habits(label);
        let tweets = (0..spec.tweets_per_author).map(|_| tweet(&mut rng, &h)).collect();
        authors.push(AuthorDocument::new(author_id(&mut rng), tweets, Some(label))?);
    }
    Corpus::new(spec.language, authors)
}

/// Copy of `corpus` with labels permuted by a seeded shuffle (class
/// counts preserved).
pub fn shuffle_labels(corpus: &Corpus, seed: u64) -> Result<Corpus> {
    let mut labels = corpus.labels()?;
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let authors = corpus
        .authors()
        .iter()
        .zip(labels)
        .map(|(a, l)| AuthorDocument {
            label: Some(l),
            ..a.clone()
        })
        .collect();
    Corpus::new(corpus.language(), authors)
}
