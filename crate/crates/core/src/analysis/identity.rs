use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gender::{GenderClassifier, NameDatabase};
use super::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityCategory {
    Anonymous,
    NameContaining,
    Depersonalized,
    Other,
}

impl IdentityCategory {
    pub const ALL: [IdentityCategory; 4] = [
        IdentityCategory::Anonymous,
        IdentityCategory::NameContaining,
        IdentityCategory::Depersonalized,
        IdentityCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityCategory::Anonymous => "Anonymous",
            IdentityCategory::NameContaining => "NameContaining",
            IdentityCategory::Depersonalized => "Depersonalized",
            IdentityCategory::Other => "Other",
        }
    }
}

impl fmt::Display for IdentityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown identity category {s:?}"))
    }
}

/// Political, religious and socioeconomic identity terms.
#[derive(Debug, Clone)]
pub struct IdentityLexicons {
    pub lists: Vec<Lexicon>,
}

impl Default for IdentityLexicons {
    fn default() -> Self {
        let load = |name, text| Lexicon::parse(name, text).expect("shipped list");
        Self {
            lists: vec![
                load("political", include_str!("../../data/political.txt")),
                load("religious", include_str!("../../data/religious.txt")),
                load("socioeconomic", include_str!("../../data/socioeconomic.txt")),
            ],
        }
    }
}

impl IdentityLexicons {
    /// Entries of at least four letters match anywhere in the lowercased
    /// username; shorter ones only as a whole segment.
    pub fn matches(&self, username: &str) -> bool {
        let lower = username.to_lowercase();
        let segments: Vec<String> = username_segments(username)
            .iter()
            .map(|s| {
                s.chars()
                    .filter(|c| c.is_alphabetic())
                    .collect::<String>()
                    .to_lowercase()
            })
            .collect();
        self.lists.iter().flat_map(Lexicon::entries).any(|e| {
            if e.chars().filter(|c| c.is_alphabetic()).count() >= 4 {
                lower.contains(e)
            } else {
                segments.iter().any(|s| s == e)
            }
        })
    }
}

/// Splits on '-' and '_' and at lower→upper case transitions
/// ("SamIsCool" → Sam, Is, Cool). Empty pieces are dropped.
pub fn username_segments(username: &str) -> Vec<String> {
    let mut out = Vec::new();
    for piece in username.split(['-', '_']) {
        let mut cur = String::new();
        let mut prev_lower = false;
        for c in piece.chars() {
            if c.is_uppercase() && prev_lower && !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            prev_lower = c.is_lowercase() || c.is_ascii_digit();
            cur.push(c);
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

/// Trailing digits reading as a birth year: exactly four in 1950–2005 or
/// exactly two in 50–99.
pub fn has_age_suffix(username: &str) -> bool {
    let digits: String = username.chars().rev().take_while(char::is_ascii_digit).collect();
    let n: u32 = match digits.chars().rev().collect::<String>().parse() {
        Ok(n) => n,
        Err(_) => return false,
    };
    match digits.len() {
        4 => (1950..=2005).contains(&n),
        2 => (50..=99).contains(&n),
        _ => false,
    }
}

fn is_anonymous(username: &str) -> bool {
    let lower = username.to_lowercase();
    lower.contains("anonymous")
        || lower.contains("throwaway")
        || (lower.contains("anon") && lower.ends_with(|c: char| c.is_ascii_digit()))
}

fn contains_name(username: &str, names: &NameDatabase) -> bool {
    let segs = username_segments(username);
    segs.len() >= 2
        && segs.iter().any(|s| {
            let w: String = s.chars().filter(|c| c.is_alphabetic()).collect();
            w.chars().count() >= 2 && names.contains(&w)
        })
}

/// Assigns exactly one category, checking Anonymous, NameContaining and
/// Depersonalized in that order.
pub fn classify_identity(
    username: &str,
    names: &NameDatabase,
    lexicons: &IdentityLexicons,
    gender: &dyn GenderClassifier,
) -> IdentityCategory {
    if is_anonymous(username) {
        IdentityCategory::Anonymous
    } else if contains_name(username, names) {
        IdentityCategory::NameContaining
    } else if gender.classify(username).is_none() && !has_age_suffix(username) && !lexicons.matches(username) {
        IdentityCategory::Depersonalized
    } else {
        IdentityCategory::Other
    }
}

#[cfg(test)]
mod tests {
    use super::super::gender::{Abstain, Gender, NameListClassifier};
    use super::*;

    #[test]
    fn segments() {
        assert_eq!(username_segments("SamIsCool"), vec!["Sam", "Is", "Cool"]);
        assert_eq!(username_segments("maga_fan"), vec!["maga", "fan"]);
        assert_eq!(username_segments("a--b"), vec!["a", "b"]);
        assert_eq!(username_segments("NASAfan"), vec!["NASAfan"]);
    }

    #[test]
    fn age_suffix() {
        assert!(has_age_suffix("cooldude1994"));
        assert!(has_age_suffix("x77"));
        assert!(!has_age_suffix("x2010"));
        assert!(!has_age_suffix("x42"));
        assert!(!has_age_suffix("x19945"));
        assert!(!has_age_suffix("plain"));
    }

    #[test]
    fn short_entries_need_segments() {
        let lex = IdentityLexicons::default();
        assert!(lex.matches("cool_phd"));
        assert!(!lex.matches("graphdesign"));
        assert!(lex.matches("iamaredneckyall"));
    }

    #[test]
    fn precedence() {
        let mut names = NameDatabase::default();
        names.insert("sam", Gender::Male, 1);
        let lex = IdentityLexicons::default();
        let g = NameListClassifier::new(names.clone());
        let c = |u| classify_identity(u, &names, &lex, &g);
        assert_eq!(c("SamThrowaway"), IdentityCategory::Anonymous);
        assert_eq!(c("SamIsCool"), IdentityCategory::NameContaining);
        assert_eq!(c("samiscool"), IdentityCategory::Depersonalized);
        assert_eq!(c("cooldude1994"), IdentityCategory::Other);
        assert_eq!(
            classify_identity("anon7", &NameDatabase::default(), &lex, &Abstain),
            IdentityCategory::Anonymous
        );
    }
}
