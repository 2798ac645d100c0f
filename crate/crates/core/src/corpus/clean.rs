//! The sequential question-cleaning rules.

use std::collections::BTreeSet;
use std::io::BufRead;

use super::{CorpusError, RejectReason};
use crate::text::squash_whitespace;

/// Dotted tokens that do not end a sentence.
pub const DEFAULT_DOTTED_TOKENS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "vs.", "prof.", "e.g.", "i.e.", "etc.", "u.s.", "u.k.", "a.m.",
    "p.m.", "no.", "approx.", "mt.", "ft.",
];

/// Abbreviation expansions, applied longest pattern first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbbreviationTable {
    rows: Vec<(String, String)>,
}

impl Default for AbbreviationTable {
    fn default() -> Self {
        Self::new(vec![("AITA".to_string(), "Am I the Asshole".to_string())]).expect("default table is valid")
    }
}

impl AbbreviationTable {
    pub fn new(rows: Vec<(String, String)>) -> Result<Self, CorpusError> {
        let mut rows: Vec<(String, String)> = rows
            .into_iter()
            .map(|(p, r)| (squash_whitespace(&p), squash_whitespace(&r)))
            .collect();
        if let Some((p, _)) = rows.iter().find(|(p, _)| p.is_empty()) {
            return Err(CorpusError::Format(format!("empty abbreviation pattern {p:?}")));
        }
        // stable: equal-length patterns keep file order
        rows.sort_by(|a, b| {
            b.0.split(' ')
                .count()
                .cmp(&a.0.split(' ').count())
                .then(b.0.len().cmp(&a.0.len()))
        });
        Ok(Self { rows })
    }

    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    /// Reads a two-column tab-separated file. Blank lines and `#` comments are skipped.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut rows = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (p, r) = line
                .split_once('\t')
                .ok_or_else(|| CorpusError::Format(format!("line {}: expected two tab-separated columns", n + 1)))?;
            rows.push((p.to_string(), r.to_string()));
        }
        Self::new(rows)
    }

    /// Expands whole-token matches. If anything was replaced the text is
    /// re-joined in token form, with edge punctuation split off words.
    fn expand(&self, text: &str) -> String {
        if self.rows.is_empty() {
            return text.to_string();
        }
        let tokens = edge_split(text);
        let mut out: Vec<String> = Vec::with_capacity(tokens.len());
        let mut changed = false;
        let mut i = 0;
        'outer: while i < tokens.len() {
            for (pattern, replacement) in &self.rows {
                let parts: Vec<&str> = pattern.split(' ').collect();
                if i + parts.len() <= tokens.len() && parts.iter().zip(&tokens[i..]).all(|(p, t)| *p == t.as_str()) {
                    out.push(replacement.clone());
                    i += parts.len();
                    changed = true;
                    continue 'outer;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        if changed {
            out.join(" ")
        } else {
            text.to_string()
        }
    }
}

const EDGE_PUNCT: &[char] = &['?', '!', '.', ',', ':', '"', '\'', '(', ')', '[', ']', '{', '}'];

/// Splits on whitespace, then peels edge punctuation off each chunk.
fn edge_split(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let core_start = chunk.find(|c: char| !EDGE_PUNCT.contains(&c)).unwrap_or(chunk.len());
        let core_end = chunk
            .rfind(|c: char| !EDGE_PUNCT.contains(&c))
            .map_or(core_start, |i| i + chunk[i..].chars().next().map_or(1, char::len_utf8));
        for c in chunk[..core_start].chars() {
            tokens.push(c.to_string());
        }
        if core_start < core_end {
            tokens.push(chunk[core_start..core_end].to_string());
        }
        for c in chunk[core_end.max(core_start)..].chars() {
            tokens.push(c.to_string());
        }
    }
    tokens
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits off the trailing run of sentence terminators.
fn split_terminal_run(text: &str) -> (&str, &str) {
    let idx = text
        .char_indices()
        .rev()
        .take_while(|(_, c)| is_terminator(*c))
        .last()
        .map_or(text.len(), |(i, _)| i);
    text.split_at(idx)
}

/// Applies the cleaning rules in their fixed order.
#[derive(Debug, Clone)]
pub struct Cleaner {
    pub abbreviations: AbbreviationTable,
    dotted_tokens: BTreeSet<String>,
}

impl Default for Cleaner {
    fn default() -> Self {
        Self::new(AbbreviationTable::default())
    }
}

impl Cleaner {
    pub fn new(abbreviations: AbbreviationTable) -> Self {
        Self {
            abbreviations,
            dotted_tokens: DEFAULT_DOTTED_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Adds tokens (e.g. `"Sgt."`) whose final dot does not end a sentence.
    pub fn with_dotted_tokens<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, tokens: I) -> Self {
        self.dotted_tokens
            .extend(tokens.into_iter().map(|t| t.as_ref().to_lowercase()));
        self
    }

    pub fn clean(&self, text: &str) -> Result<String, RejectReason> {
        let text = squash_whitespace(text);
        if text.is_empty() {
            return Err(RejectReason::EmptyAfterCleaning);
        }

        // multiple sentences, or no sentence-final marker
        let (body, run) = split_terminal_run(&text);
        if run.is_empty() {
            return Err(RejectReason::NoQuestionMark);
        }
        if self.is_multi_sentence(body) {
            return Err(RejectReason::MultiSentence);
        }
        // no question mark
        if !run.contains('?') {
            return Err(RejectReason::NoQuestionMark);
        }
        // collapse the marker run to one '?'
        let collapsed = if run == "?" { text.clone() } else { format!("{body}?") };
        // bracketed meta such as [30M]
        let stripped = squash_whitespace(&strip_meta(&collapsed));
        // abbreviations
        let expanded = self.abbreviations.expand(&stripped);
        // html entities
        let decoded = squash_whitespace(&decode_html(&expanded));

        let (body, _) = split_terminal_run(&decoded);
        if body.trim().is_empty() {
            return Err(RejectReason::EmptyAfterCleaning);
        }
        if content_words(&decoded) < 4 {
            return Err(RejectReason::TooShort);
        }
        Ok(decoded)
    }

    pub fn is_valid_question(&self, text: &str) -> bool {
        let (body, run) = split_terminal_run(text);
        run == "?" && !self.is_multi_sentence(body) && content_words(text) >= 4
    }

    /// True when a terminator inside `body` is followed (after optional
    /// whitespace) by a letter. Single dots glued to a following letter
    /// (`reddit.com`), listed dotted tokens and one-letter initials are exempt.
    fn is_multi_sentence(&self, body: &str) -> bool {
        let chars: Vec<(usize, char)> = body.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if !is_terminator(c) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < chars.len() && is_terminator(chars[j].1) {
                j += 1;
            }
            let run_len = j - i;
            let all_dots = chars[i..j].iter().all(|&(_, c)| c == '.');
            let glued = j < chars.len() && chars[j].1.is_alphanumeric();
            if !(all_dots && run_len == 1 && glued) {
                let mut k = j;
                while k < chars.len() && chars[k].1.is_whitespace() {
                    k += 1;
                }
                if k < chars.len() && chars[k].1.is_alphabetic() {
                    let end = chars.get(j).map_or(body.len(), |&(p, _)| p);
                    let start = body[..pos].rfind(char::is_whitespace).map_or(0, |p| p + 1);
                    let token = body[start..end].to_lowercase();
                    if !(all_dots && self.is_dotted_token(&token)) {
                        return true;
                    }
                }
            }
            i = j;
        }
        false
    }

    fn is_dotted_token(&self, token: &str) -> bool {
        let trimmed = token.trim_start_matches(|c: char| !c.is_alphanumeric());
        if self.dotted_tokens.contains(trimmed) {
            return true;
        }
        // initials like "J." or "J.K."
        trimmed
            .split_terminator('.')
            .all(|part| part.chars().count() == 1 && part.chars().all(char::is_alphabetic))
    }
}

/// Words that contain at least one alphanumeric character.
pub(crate) fn content_words(text: &str) -> usize {
    text.split_whitespace()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

/// Cleans `text` with the given abbreviation table and default settings.
pub fn clean_text(text: &str, table: &AbbreviationTable) -> Result<String, RejectReason> {
    Cleaner::new(table.clone()).clean(text)
}

/// Single sentence, ends with exactly one '?', at least four words.
pub fn is_valid_question(text: &str) -> bool {
    Cleaner::new(AbbreviationTable::empty()).is_valid_question(text)
}

fn is_meta_inner(inner: &str) -> bool {
    let s: String = inner.chars().filter(|c| !c.is_whitespace()).collect();
    let digits_then_letters = {
        let d = s.chars().take_while(char::is_ascii_digit).count();
        let rest = &s[d..];
        (1..=3).contains(&d) && (1..=2).contains(&rest.len()) && rest.chars().all(|c| c.is_ascii_alphabetic())
    };
    let letters_then_digits = {
        let l = s.chars().take_while(char::is_ascii_alphabetic).count();
        let rest = &s[l..];
        (1..=2).contains(&l) && (1..=3).contains(&rest.len()) && rest.chars().all(|c| c.is_ascii_digit())
    };
    digits_then_letters || letters_then_digits
}

/// Removes age/gender tags like `[30M]`, `[F25]` or `(17m)`.
pub fn strip_meta(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find(['[', '(']) {
        let close_char = if rest[open..].starts_with('[') { ']' } else { ')' };
        match rest[open + 1..].find(close_char) {
            Some(rel) if is_meta_inner(&rest[open + 1..open + 1 + rel]) => {
                out.push_str(&rest[..open]);
                rest = &rest[open + 1 + rel + 1..];
            }
            _ => {
                out.push_str(&rest[..open + 1]);
                rest = &rest[open + 1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Decodes HTML entities; `&amp;` becomes the word "and".
pub fn decode_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let semi = tail.find(';').filter(|&s| s <= 10);
        let decoded = semi.and_then(|s| {
            let name = &tail[1..s];
            let rep = match name {
                "amp" => Some(" and ".to_string()),
                "lt" => Some("<".to_string()),
                "gt" => Some(">".to_string()),
                "quot" => Some("\"".to_string()),
                "apos" => Some("'".to_string()),
                "nbsp" => Some(" ".to_string()),
                _ if name.starts_with("#x") || name.starts_with("#X") => u32::from_str_radix(&name[2..], 16)
                    .ok()
                    .and_then(char::from_u32)
                    .map(String::from),
                _ if name.starts_with('#') => name[1..].parse::<u32>().ok().and_then(char::from_u32).map(String::from),
                _ => None,
            };
            rep.map(|r| (r, s + 1))
        });
        match decoded {
            Some((rep, consumed)) => {
                out.push_str(&rep);
                rest = &tail[consumed..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
