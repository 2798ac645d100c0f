use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::identity::username_segments;
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Gender::Female),
            "male" | "m" => Ok(Gender::Male),
            other => Err(format!("unknown gender {other:?}")),
        }
    }
}

/// Speaker→audience gender pair. `FF` is the regression reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DyadLabel {
    FF,
    FM,
    MF,
    MM,
}

impl DyadLabel {
    pub const REFERENCE: DyadLabel = DyadLabel::FF;

    pub fn from_genders(speaker: Gender, audience: Gender) -> Self {
        match (speaker, audience) {
            (Gender::Female, Gender::Female) => DyadLabel::FF,
            (Gender::Female, Gender::Male) => DyadLabel::FM,
            (Gender::Male, Gender::Female) => DyadLabel::MF,
            (Gender::Male, Gender::Male) => DyadLabel::MM,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DyadLabel::FF => "FF",
            DyadLabel::FM => "FM",
            DyadLabel::MF => "MF",
            DyadLabel::MM => "MM",
        }
    }
}

impl fmt::Display for DyadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const MALE_WORDS: &[&str] = &[
    "man", "he", "mr", "boy", "husband", "him", "uncle", "guy", "sir", "brother", "father",
];
const FEMALE_WORDS: &[&str] = &[
    "woman", "she", "mrs", "miss", "girl", "madam", "her", "aunt", "wife", "sister", "mother",
];

/// Gender carried by a title or role word ("Mr.", "mother"); case and a trailing dot are ignored.
pub fn gendered_word(word: &str) -> Option<Gender> {
    let w = word.trim_end_matches('.').to_lowercase();
    if MALE_WORDS.contains(&w.as_str()) {
        Some(Gender::Male)
    } else if FEMALE_WORDS.contains(&w.as_str()) {
        Some(Gender::Female)
    } else {
        None
    }
}

/// Given name → per-gender counts.
#[derive(Debug, Clone, Default)]
pub struct NameDatabase {
    counts: HashMap<String, [u64; 2]>,
}

impl NameDatabase {
    /// CSV with header `name,gender,count`; repeated names accumulate.
    pub fn from_csv<R: Read>(r: R) -> Result<Self, AnalysisError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut db = NameDatabase::default();
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| AnalysisError::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() < 3 {
                return Err(AnalysisError::Parse {
                    line,
                    message: "expected name,gender,count".into(),
                });
            }
            let gender: Gender = rec[1]
                .parse()
                .map_err(|message| AnalysisError::Parse { line, message })?;
            let count: u64 = rec[2]
                .parse()
                .map_err(|e: std::num::ParseIntError| AnalysisError::Parse {
                    line,
                    message: e.to_string(),
                })?;
            db.insert(&rec[0], gender, count);
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    /// Small shipped list of common US given names.
    pub fn builtin() -> Self {
        Self::from_csv(include_str!("../../data/names.csv").as_bytes()).expect("shipped list")
    }

    pub fn insert(&mut self, name: &str, gender: Gender, count: u64) {
        let c = self.counts.entry(name.trim().to_lowercase()).or_default();
        c[gender as usize] += count;
    }

    pub fn contains(&self, name: &str) -> bool {
        self.counts.contains_key(&name.to_lowercase())
    }

    /// Majority gender for the name; `None` if unknown or tied.
    pub fn gender_of(&self, name: &str) -> Option<Gender> {
        let [f, m] = *self.counts.get(&name.to_lowercase())?;
        match f.cmp(&m) {
            std::cmp::Ordering::Greater => Some(Gender::Female),
            std::cmp::Ordering::Less => Some(Gender::Male),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Username → gender. Implementations may abstain.
pub trait GenderClassifier: Send + Sync {
    fn classify(&self, username: &str) -> Option<Gender>;
}

/// Always abstains.
#[derive(Debug, Clone, Copy, Default)]
pub struct Abstain;

impl GenderClassifier for Abstain {
    fn classify(&self, _: &str) -> Option<Gender> {
        None
    }
}

/// Fallback classifier: looks up each username segment as a given name or a
/// gendered word and answers only when all signals agree.
#[derive(Debug, Clone)]
pub struct NameListClassifier {
    db: NameDatabase,
}

impl NameListClassifier {
    pub fn new(db: NameDatabase) -> Self {
        Self { db }
    }
}

impl GenderClassifier for NameListClassifier {
    fn classify(&self, username: &str) -> Option<Gender> {
        let mut seen: Option<Gender> = None;
        for seg in username_segments(username) {
            let word: String = seg.chars().filter(|c| c.is_alphabetic()).collect();
            if word.len() < 2 {
                continue;
            }
            let g = gendered_word(&word).or_else(|| self.db.gender_of(&word));
            match (seen, g) {
                (_, None) => {}
                (None, Some(g)) => seen = Some(g),
                (Some(a), Some(b)) if a != b => return None,
                _ => {}
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    /// A fictional character or addressee name, e.g. "Mrs. Dalloway".
    Character,
    Username,
}

/// Character names: first token found in the name database, else a gendered
/// title/role word. Usernames go to `classifier`.
pub fn infer_gender(
    name: &str,
    kind: NameKind,
    db: &NameDatabase,
    classifier: &dyn GenderClassifier,
) -> Option<Gender> {
    match kind {
        NameKind::Username => classifier.classify(name),
        NameKind::Character => {
            let toks: Vec<&str> = name
                .split_whitespace()
                .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric() && c != '.'))
                .filter(|t| !t.is_empty())
                .collect();
            toks.iter()
                .find_map(|t| db.gender_of(t.trim_end_matches('.')))
                .or_else(|| toks.iter().find_map(|t| gendered_word(t)))
        }
    }
}

/// The 1–2 token vocative between the last comma and the closing '?'
/// ("What is this, Tom?" → "Tom"). Each token must be capitalized or a
/// gendered word.
pub fn extract_addressee(text: &str) -> Option<String> {
    let body = text.trim_end().strip_suffix('?')?.trim_end_matches(['?', '!']);
    let (_, tail) = body.rsplit_once(',')?;
    let toks: Vec<&str> = tail.split_whitespace().collect();
    if toks.is_empty() || toks.len() > 2 {
        return None;
    }
    let ok = toks.iter().all(|t| {
        t.chars().all(|c| c.is_alphabetic() || matches!(c, '.' | '\'' | '-'))
            && (t.chars().next().is_some_and(char::is_uppercase) || gendered_word(t).is_some())
    });
    ok.then(|| toks.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db() -> NameDatabase {
        let mut d = NameDatabase::default();
        d.insert("Tom", Gender::Male, 10);
        d.insert("Alex", Gender::Male, 5);
        d.insert("alex", Gender::Female, 5);
        d
    }

    #[test]
    fn character_names() {
        let d = db();
        assert_eq!(
            infer_gender("Mrs. Dalloway", NameKind::Character, &d, &Abstain),
            Some(Gender::Female)
        );
        assert_eq!(
            infer_gender("Tom", NameKind::Character, &d, &Abstain),
            Some(Gender::Male)
        );
        assert_eq!(
            infer_gender("Mr. Tom Smith", NameKind::Character, &d, &Abstain),
            Some(Gender::Male)
        );
        assert_eq!(infer_gender("Zyx", NameKind::Character, &d, &Abstain), None);
        assert_eq!(infer_gender("Alex", NameKind::Character, &d, &Abstain), None);
    }

    #[test]
    fn usernames_delegate() {
        let d = db();
        let c = NameListClassifier::new(d.clone());
        assert_eq!(infer_gender("TomRocks", NameKind::Username, &d, &c), Some(Gender::Male));
        assert_eq!(infer_gender("Tom", NameKind::Username, &d, &Abstain), None);
        assert_eq!(c.classify("tom_and_his_wife"), None);
    }

    #[test]
    fn addressee() {
        assert_eq!(extract_addressee("What is this, Tom?").as_deref(), Some("Tom"));
        assert_eq!(
            extract_addressee("Where are you going, Mr. Darcy?").as_deref(),
            Some("Mr. Darcy")
        );
        assert_eq!(extract_addressee("Are you hungry, mother?").as_deref(), Some("mother"));
        assert_eq!(extract_addressee("What, in your opinion, is the best pie?"), None);
        assert_eq!(extract_addressee("What is this?"), None);
        assert_eq!(extract_addressee("Is it, you know?"), None);
    }

    #[test]
    fn builtin_database() {
        let d = NameDatabase::builtin();
        assert_eq!(d.gender_of("Tom"), Some(Gender::Male));
        assert_eq!(d.gender_of("Jessica"), Some(Gender::Female));
        assert!(d.contains("sam"));
    }

    #[test]
    fn dyads() {
        assert_eq!(DyadLabel::from_genders(Gender::Male, Gender::Female), DyadLabel::MF);
        assert_eq!(DyadLabel::REFERENCE.to_string(), "FF");
    }
}
