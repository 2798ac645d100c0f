//! CSV row layouts shared by the subcommands and the synthetic generators.

use serde::{Deserialize, Serialize};

/// `question_id,text,score` — training and evaluation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuestion {
    pub question_id: String,
    pub text: String,
    pub score: f64,
}

/// `question_id,domain,text,score` — input to the marker contrasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainQuestion {
    pub question_id: String,
    pub domain: String,
    pub text: String,
    pub score: f64,
}

/// One quoted question between two characters (or users).
///
/// `groups` is the nesting path of random-intercept groups, `/`-separated
/// (e.g. `author7/book2`). Empty gender columns are inferred from the names;
/// an empty addressee is taken from a vocative in the text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadQuestion {
    pub question_id: String,
    pub score: f64,
    pub text: String,
    pub speaker: String,
    pub addressee: String,
    /// `character` or `username`.
    pub kind: String,
    pub groups: String,
    #[serde(default)]
    pub speaker_gender: String,
    #[serde(default)]
    pub addressee_gender: String,
}

/// `question_id,score,username,subreddit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserQuestion {
    pub question_id: String,
    pub score: f64,
    pub username: String,
    pub subreddit: String,
}

/// A directed question between two accounts of the mention graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddressedQuestion {
    pub question_id: String,
    pub asker: String,
    pub recipient: String,
    pub score: f64,
    pub recipient_followers: u64,
    pub recipient_verified: bool,
}

/// `source,target` pair for distance queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPair {
    pub source: String,
    pub target: String,
}
