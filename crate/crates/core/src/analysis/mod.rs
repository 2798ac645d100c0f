//! Pragmatic-marker contrasts, gender dyads, username identity categories,
//! and the grouped regression machinery they share.

mod gender;
mod identity;
mod lexicon;
mod markers;
mod regression;

use std::collections::BTreeMap;
use std::fmt::Display;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::stats::{mean, sample_sd};

pub use gender::{
    extract_addressee, gendered_word, infer_gender, Abstain, DyadLabel, Gender, GenderClassifier, NameDatabase,
    NameKind, NameListClassifier,
};
pub use identity::{classify_identity, has_age_suffix, username_segments, IdentityCategory, IdentityLexicons};
pub use lexicon::{tag_markers, Lexicon};
pub use markers::{marker_contrast, write_marker_contrast, DomainContrast, MarkerContrast, ScoredText};
pub use regression::{
    group_intercept_regression, marginal_effects, p_stars, write_marginal_effects, write_regression, Coefficient,
    MarginalEffect, Observation, RegressionResult,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("lexicon {0:?} has no entries")]
    EmptyLexicon(String),
    #[error("domain {0:?} has zero variance")]
    ZeroVariance(String),
    #[error("domain {0:?} has fewer than 2 items")]
    TooFewItems(String),
    #[error("reference level {0:?} not present")]
    MissingReference(String),
    #[error("need at least 2 levels of the focal term, got {0}")]
    TooFewLevels(usize),
    #[error("design is rank deficient at term {0:?}")]
    RankDeficient(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Z-scores each value against the mean and sample SD of its own domain.
/// Output is aligned with the input.
pub fn zstandardize_within_domain<K, T>(items: &[(K, T)]) -> Result<Vec<T>, AnalysisError>
where
    K: Ord + Display,
    T: Scalar,
{
    let mut by_domain: BTreeMap<&K, Vec<T>> = BTreeMap::new();
    for (k, v) in items {
        by_domain.entry(k).or_default().push(*v);
    }
    let mut moments = BTreeMap::new();
    for (k, vs) in &by_domain {
        if vs.len() < 2 {
            return Err(AnalysisError::TooFewItems(k.to_string()));
        }
        let sd = sample_sd(vs);
        if !(sd > T::zero()) {
            return Err(AnalysisError::ZeroVariance(k.to_string()));
        }
        moments.insert(*k, (mean(vs), sd));
    }
    Ok(items
        .iter()
        .map(|(k, v)| {
            let (m, sd) = moments[k];
            (*v - m) / sd
        })
        .collect())
}
