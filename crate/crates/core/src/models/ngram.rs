//! Unigram/bigram/trigram bag-of-words features.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::text::tokenize;

pub const DEFAULT_VOCABULARY_SIZE: usize = 10_000;
pub const MAX_NGRAM: usize = 3;

/// Compressed sparse rows; column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows<T> {
    rows: Vec<Vec<(usize, T)>>,
    cols: usize,
}

impl<T: Scalar> SparseRows<T> {
    pub fn new(cols: usize) -> Self {
        Self { rows: Vec::new(), cols }
    }

    /// Adds a row, sorting by column and summing duplicate columns.
    pub fn push_row(&mut self, mut entries: Vec<(usize, T)>) {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!(c < self.cols, "column {c} out of range");
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != T::zero());
        self.rows.push(merged);
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            m.push_row(r.iter().copied().enumerate().collect());
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, T)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn row_dense(&self, i: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for &(c, v) in &self.rows[i] {
            out[c] = v;
        }
        out
    }

    pub fn dot_row(&self, i: usize, w: &[T]) -> T {
        self.rows[i].iter().map(|&(c, v)| v * w[c]).sum()
    }
}

/// Dot product of two sorted sparse rows.
pub(crate) fn sparse_dot<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)]) -> T {
    let (mut i, mut j, mut s) = (0, 0, T::zero());
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// All 1..=`max_n`-grams of a token sequence, joined with single spaces.
pub fn ngrams(tokens: &[String], max_n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=max_n).flat_map(move |n| tokens.windows(n).map(|w| w.join(" ")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramVocabulary {
    entries: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl NgramVocabulary {
    /// Uses `entries` in the given order as indices 0..len. Duplicates are an error.
    pub fn from_entries(entries: Vec<String>) -> Result<Self, String> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(format!("duplicate n-gram {e:?}"));
            }
        }
        Ok(Self { entries, index })
    }

    /// Top `max_size` n-grams by corpus frequency; ties broken lexicographically.
    pub fn build<S: AsRef<str>>(texts: &[S], max_size: usize) -> Self {
        let mut freq: HashMap<String, usize> = HashMap::new();
        for t in texts {
            let tokens = tokenize(t.as_ref());
            for g in ngrams(&tokens, MAX_NGRAM) {
                *freq.entry(g).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);
        Self::from_entries(ranked.into_iter().map(|(g, _)| g).collect()).expect("unique keys")
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.entries.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn get(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    /// Count matrix; out-of-vocabulary n-grams are ignored.
    pub fn features<T: Scalar, S: AsRef<str>>(&self, texts: &[S]) -> SparseRows<T> {
        let mut m = SparseRows::new(self.len());
        for t in texts {
            let tokens = tokenize(t.as_ref());
            let row = ngrams(&tokens, MAX_NGRAM)
                .filter_map(|g| self.get(&g))
                .map(|c| (c, T::one()))
                .collect();
            m.push_row(row);
        }
        m
    }
}

/// Count features of `texts` under `vocabulary`.
pub fn build_ngram_features<T: Scalar, S: AsRef<str>>(texts: &[S], vocabulary: &NgramVocabulary) -> SparseRows<T> {
    vocabulary.features(texts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> NgramVocabulary {
        NgramVocabulary::from_entries(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn hand_counted_row() {
        let v = vocab(&["what", "is", "what is", "is is"]);
        let x: SparseRows<f64> = build_ngram_features(&["what is is"], &v);
        assert_eq!(x.row_dense(0), vec![1.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn empty_and_oov_rows_are_zero() {
        let v = vocab(&["what"]);
        let x: SparseRows<f64> = v.features(&["", "nothing here matches"]);
        assert!(x.row(0).is_empty());
        assert!(x.row(1).is_empty());
    }

    #[test]
    fn vocabulary_ranking_and_cap() {
        let v = NgramVocabulary::build(&["b a", "a c"], 3);
        // counts: a=2, then b, c, "a c", "b a" all 1 -> lexicographic
        assert_eq!(v.entries(), &["a", "a c", "b"]);
        assert!(NgramVocabulary::from_entries(vec!["x".into(), "x".into()]).is_err());
    }

    #[test]
    fn trigram_cap() {
        let tokens: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let g: Vec<String> = ngrams(&tokens, 3).collect();
        assert_eq!(g.len(), 4 + 3 + 2);
        assert!(g.contains(&"b c d".to_string()));
    }

    #[test]
    fn sparse_dot_merges() {
        let a = vec![(0, 1.0f64), (3, 2.0), (7, 1.0)];
        let b = vec![(3, 4.0f64), (7, 0.5)];
        assert_eq!(sparse_dot(&a, &b), 8.5);
    }
}
