use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use super::AnalysisError;
use crate::text::tokenize;

/// A named list of lowercase phrases, matched on token boundaries.
#[derive(Debug, Clone)]
pub struct Lexicon {
    name: String,
    entries: BTreeSet<String>,
    phrases: HashSet<String>,
    longest: usize,
}

impl Lexicon {
    pub fn new<I, S>(name: &str, entries: I) -> Result<Self, AnalysisError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: BTreeSet<String> = entries
            .into_iter()
            .map(|e| e.as_ref().trim().to_lowercase())
            .filter(|e| !e.is_empty())
            .collect();
        let mut phrases = HashSet::new();
        let mut longest = 0;
        for e in &entries {
            let toks = tokenize(e);
            if toks.is_empty() {
                continue;
            }
            longest = longest.max(toks.len());
            phrases.insert(toks.join(" "));
        }
        if entries.is_empty() {
            return Err(AnalysisError::EmptyLexicon(name.to_string()));
        }
        Ok(Self {
            name: name.to_string(),
            entries,
            phrases,
            longest,
        })
    }

    /// One phrase per line; blank lines and `#` comments are skipped.
    pub fn parse(name: &str, text: &str) -> Result<Self, AnalysisError> {
        Self::new(name, text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn load(name: &str, path: &Path) -> Result<Self, AnalysisError> {
        Self::parse(name, &std::fs::read_to_string(path)?)
    }

    pub fn hedges() -> Self {
        Self::parse("hedges", include_str!("../../data/hedges.txt")).expect("shipped list")
    }

    pub fn swears() -> Self {
        Self::parse("swears", include_str!("../../data/swears.txt")).expect("shipped list")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Raw lowercase entries, as listed.
    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn matches(&self, text: &str) -> bool {
        let toks = tokenize(text);
        for start in 0..toks.len() {
            let mut phrase = String::new();
            for (len, tok) in toks[start..].iter().take(self.longest).enumerate() {
                if len > 0 {
                    phrase.push(' ');
                }
                phrase.push_str(tok);
                if self.phrases.contains(&phrase) {
                    return true;
                }
            }
        }
        false
    }
}

/// True iff some lexicon phrase occurs as a contiguous run of tokens.
pub fn tag_markers(text: &str, lexicon: &Lexicon) -> bool {
    lexicon.matches(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_boundaries() {
        let lex = Lexicon::new("t", ["might", "in my opinion"]).unwrap();
        assert!(tag_markers("What might be your best childhood memory?", &lex));
        assert!(!tag_markers("What is your best childhood memory?", &lex));
        assert!(!tag_markers("A mighty oak?", &lex));
        assert!(tag_markers("IN MY OPINION, why?", &lex));
        assert!(!tag_markers("in my own opinion?", &lex));
    }

    #[test]
    fn shipped_lists() {
        assert_eq!(Lexicon::hedges().len(), 100);
        assert!(tag_markers("Why would you say that?", &Lexicon::hedges()));
        assert!(tag_markers("What the hell is this?", &Lexicon::swears()));
        assert!(tag_markers("Couldn't you just leave?", &Lexicon::hedges()));
    }

    #[test]
    fn empty_is_rejected() {
        assert!(Lexicon::parse("e", "\n# nothing\n  \n").is_err());
    }
}
