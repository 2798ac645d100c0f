//! Raw post ingestion and question extraction.
//!
//! Every source goes through [`Cleaner`]; sources differ only in the
//! normalization applied before it (address-term stripping for Reddit
//! titles, mention/URL/emoji handling for tweets).

mod clean;
pub mod io;

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{
    clean_text, decode_html, is_valid_question, strip_meta, AbbreviationTable, Cleaner, DEFAULT_DOTTED_TOKENS,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate raw item id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    RedditPost,
    RedditComment,
    Twitter,
    Book,
    Movie,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::RedditPost,
        Domain::RedditComment,
        Domain::Twitter,
        Domain::Book,
        Domain::Movie,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::RedditPost => "reddit_post",
            Domain::RedditComment => "reddit_comment",
            Domain::Twitter => "twitter",
            Domain::Book => "book",
            Domain::Movie => "movie",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CorpusError::Format(format!("unknown domain {s:?}")))
    }
}

/// Why an item did not become a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoQuestionMark,
    MultiSentence,
    TooShort,
    EmptyAfterCleaning,
    /// Reddit title with more than one '?'.
    MultipleQuestionMarks,
    /// Tweet whose cleaned text was already emitted.
    Duplicate,
    /// Tweet addressed to its own author.
    SelfReply,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawItem {
    pub id: String,
    pub domain: Domain,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub domain: Domain,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<RejectReason>,
}

/// Source-specific settings for [`extract_questions`].
#[derive(Debug, Clone)]
pub struct DomainRules {
    /// Twitter handle (without `@`) to display name.
    pub display_names: HashMap<String, String>,
    /// Strip a leading "Members of r/X," style clause from Reddit titles.
    pub strip_address_terms: bool,
}

impl Default for DomainRules {
    fn default() -> Self {
        Self {
            display_names: HashMap::new(),
            strip_address_terms: true,
        }
    }
}

/// Drops a leading clause that addresses a subreddit, up to the first comma.
pub fn strip_address_term(text: &str) -> &str {
    match text.split_once(',') {
        Some((head, tail)) if head.contains("r/") && !tail.trim().is_empty() => tail.trim_start(),
        _ => text,
    }
}

fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2B00..=0x2BFF
        | 0xFE00..=0xFE0F
        | 0x200D
        | 0x20E3
        | 0xE0020..=0xE007F)
}

/// Replaces mentions with display names (dropping unknown handles) and removes URLs and emoji.
pub fn normalize_tweet(text: &str, display_names: &HashMap<String, String>) -> String {
    let without_emoji: String = text.chars().filter(|&c| !is_emoji(c)).collect();
    let mut out: Vec<String> = Vec::new();
    for token in without_emoji.split_whitespace() {
        let lower = token.to_ascii_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            continue;
        }
        if let Some(handle) = token.strip_prefix('@') {
            let end = handle
                .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                .unwrap_or(handle.len());
            let (name, trailing) = handle.split_at(end);
            match display_names.get(name) {
                Some(display) => out.push(format!("{display}{trailing}")),
                None if !trailing.is_empty() && !out.is_empty() => {
                    // keep punctuation such as the '?' in "how are you @bob?"
                    if let Some(last) = out.last_mut() {
                        last.push_str(trailing);
                    }
                }
                None => {}
            }
            continue;
        }
        out.push(token.to_string());
    }
    out.join(" ")
}

fn extract_one(item: &RawItem, cleaner: &Cleaner, rules: &DomainRules) -> Result<String, RejectReason> {
    match item.domain {
        Domain::RedditPost => {
            match item.text.matches('?').count() {
                0 => return Err(RejectReason::NoQuestionMark),
                1 => {}
                _ => return Err(RejectReason::MultipleQuestionMarks),
            }
            let text = if rules.strip_address_terms {
                strip_address_term(&item.text)
            } else {
                &item.text
            };
            cleaner.clean(text)
        }
        Domain::Twitter => {
            let author = item.metadata.get("author_username");
            if author.is_some() && author == item.metadata.get("recipient_username") {
                return Err(RejectReason::SelfReply);
            }
            cleaner.clean(&normalize_tweet(&item.text, &rules.display_names))
        }
        Domain::RedditComment | Domain::Book | Domain::Movie => cleaner.clean(&item.text),
    }
}

/// Turns raw items into questions. Every input lands in exactly one of the
/// two returned lists, in input order; the batch never aborts.
pub fn extract_questions(
    raw_items: &[RawItem],
    cleaner: &Cleaner,
    rules: &DomainRules,
) -> (Vec<Question>, Vec<(RawItem, RejectReason)>) {
    let outcomes: Vec<Result<String, RejectReason>> = raw_items
        .par_iter()
        .map(|item| extract_one(item, cleaner, rules))
        .collect();

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_tweets: HashSet<String> = HashSet::new();
    for (item, outcome) in raw_items.iter().zip(outcomes) {
        let outcome = outcome.and_then(|text| {
            if item.domain == Domain::Twitter && !seen_tweets.insert(text.to_lowercase()) {
                Err(RejectReason::Duplicate)
            } else {
                Ok(text)
            }
        });
        match outcome {
            Ok(text) => accepted.push(Question {
                id: item.id.clone(),
                domain: item.domain,
                text,
                metadata: item.metadata.clone(),
                rejected: None,
            }),
            Err(reason) => rejected.push((item.clone(), reason)),
        }
    }
    (accepted, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(id: &str, domain: Domain, text: &str) -> RawItem {
        RawItem {
            id: id.into(),
            domain,
            text: text.into(),
            metadata: BTreeMap::new(),
        }
    }

    #[test]
    fn reddit_address_term_is_stripped() {
        let items = vec![raw(
            "1",
            Domain::RedditPost,
            "Members of r/AskScience, why is the sky blue?",
        )];
        let (ok, bad) = extract_questions(&items, &Cleaner::default(), &DomainRules::default());
        assert!(bad.is_empty());
        assert_eq!(ok[0].text, "why is the sky blue?");
    }

    #[test]
    fn reddit_titles_need_exactly_one_question_mark() {
        let items = vec![
            raw("1", Domain::RedditPost, "Why?? Why would anyone do this"),
            raw("2", Domain::RedditPost, "Tell me about your day"),
        ];
        let (ok, bad) = extract_questions(&items, &Cleaner::default(), &DomainRules::default());
        assert!(ok.is_empty());
        assert_eq!(bad[0].1, RejectReason::MultipleQuestionMarks);
        assert_eq!(bad[1].1, RejectReason::NoQuestionMark);
    }

    #[test]
    fn tweet_mentions_urls_and_emoji() {
        let mut rules = DomainRules::default();
        rules.display_names.insert("user123".into(), "Sam Lee".into());
        let items = vec![raw("t1", Domain::Twitter, "@user123 how are you? http://t.co/x")];
        let (ok, _) = extract_questions(&items, &Cleaner::default(), &rules);
        assert_eq!(ok[0].text, "Sam Lee how are you?");

        let plain = normalize_tweet("did you see that \u{1F602}\u{1F602} @nobody?", &HashMap::new());
        assert_eq!(plain, "did you see that?");
    }

    #[test]
    fn tweet_duplicates_and_self_replies_dropped() {
        let mut selfie = raw("t3", Domain::Twitter, "Why do I keep talking to myself?");
        selfie.metadata.insert("author_username".into(), "me".into());
        selfie.metadata.insert("recipient_username".into(), "me".into());
        let items = vec![
            raw("t1", Domain::Twitter, "Are you coming to the party?"),
            raw("t2", Domain::Twitter, "are you coming to the party?"),
            selfie,
        ];
        let (ok, bad) = extract_questions(&items, &Cleaner::default(), &DomainRules::default());
        assert_eq!(ok.len(), 1);
        assert_eq!(bad[0].1, RejectReason::Duplicate);
        assert_eq!(bad[1].1, RejectReason::SelfReply);
    }

    #[test]
    fn quotes_need_question_mark() {
        let items = vec![
            raw("m1", Domain::Movie, "Do it."),
            raw("b1", Domain::Book, "What is this, Tom?"),
        ];
        let (ok, bad) = extract_questions(&items, &Cleaner::default(), &DomainRules::default());
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].0.id, "m1");
        assert_eq!(ok[0].text, "What is this, Tom?");
    }

    #[test]
    fn reason_display_is_snake_case() {
        assert_eq!(RejectReason::TooShort.to_string(), "too_short");
        assert_eq!("twitter".parse::<Domain>().unwrap(), Domain::Twitter);
    }
}
