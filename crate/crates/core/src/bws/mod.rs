//! Best-worst scaling: tuple design, pairwise expansion of best/worst picks,
//! and Luce spectral ranking of the resulting comparisons.

mod ilsr;
pub mod io;
mod tuples;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use ilsr::{ilsr, ilsr_counts, IlsrParams};
pub use tuples::generate_tuples;

pub type ItemId = String;

#[derive(Debug, Error)]
pub enum BwsError {
    #[error("need at least 4 distinct items, got {0}")]
    TooFewItems(usize),
    #[error("item {0:?} listed twice")]
    DuplicateItem(String),
    #[error("cannot place every item in {0} distinct tuples")]
    CannotSatisfy(usize),
    #[error("invalid judgment for tuple {tuple_id}: {reason}")]
    InvalidJudgment { tuple_id: String, reason: String },
    #[error("comparisons cover {0} item(s); at least 2 are required")]
    TooFewComparedItems(usize),
    #[error("comparison graph is not strongly connected and regularization is 0")]
    NotConnected,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Four distinct items shown together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tuple4 {
    pub tuple_id: String,
    pub items: [ItemId; 4],
}

impl Tuple4 {
    pub fn new(tuple_id: impl Into<String>, items: [ItemId; 4]) -> Result<Self, BwsError> {
        let tuple_id = tuple_id.into();
        for i in 0..4 {
            for j in (i + 1)..4 {
                if items[i] == items[j] {
                    return Err(BwsError::InvalidJudgment {
                        tuple_id,
                        reason: format!("item {:?} repeated", items[i]),
                    });
                }
            }
        }
        Ok(Self { tuple_id, items })
    }

    pub fn contains(&self, item: &str) -> bool {
        self.items.iter().any(|i| i == item)
    }
}

/// One annotator's most/least pick over a tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub tuple_id: String,
    pub best: ItemId,
    pub worst: ItemId,
    pub annotator_id: String,
    #[serde(default)]
    pub timestamp: Option<String>,
}

impl Judgment {
    pub fn validate(&self, tuple: &Tuple4) -> Result<(), BwsError> {
        let fail = |reason: String| BwsError::InvalidJudgment {
            tuple_id: tuple.tuple_id.clone(),
            reason,
        };
        if self.tuple_id != tuple.tuple_id {
            return Err(fail(format!("judgment names tuple {:?}", self.tuple_id)));
        }
        if self.best == self.worst {
            return Err(fail("best and worst are the same item".into()));
        }
        for pick in [&self.best, &self.worst] {
            if !tuple.contains(pick) {
                return Err(fail(format!("{pick:?} is not in the tuple")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub winner: ItemId,
    pub loser: ItemId,
}

/// The five comparisons implied by a best/worst pick: best beats the other
/// three, and the two middle items beat worst. The middle pair is unordered.
pub fn expand_pairs(judgment: &Judgment, tuple: &Tuple4) -> Result<[PairwiseComparison; 5], BwsError> {
    judgment.validate(tuple)?;
    let middle: Vec<&ItemId> = tuple
        .items
        .iter()
        .filter(|i| **i != judgment.best && **i != judgment.worst)
        .collect();
    let cmp = |w: &str, l: &str| PairwiseComparison {
        winner: w.to_string(),
        loser: l.to_string(),
    };
    let mut beaten = tuple.items.iter().filter(|i| **i != judgment.best);
    let (a, b, c) = (
        beaten.next().expect("three others"),
        beaten.next().expect("three others"),
        beaten.next().expect("three others"),
    );
    Ok([
        cmp(&judgment.best, a),
        cmp(&judgment.best, b),
        cmp(&judgment.best, c),
        cmp(middle[0], &judgment.worst),
        cmp(middle[1], &judgment.worst),
    ])
}

/// Luce strengths, positive and summing to one. Items are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtlStrengths<T> {
    items: Vec<ItemId>,
    strengths: Vec<T>,
}

impl<T: Scalar> BtlStrengths<T> {
    /// Builds from parallel vectors, renormalizing to unit sum.
    pub fn new(items: Vec<ItemId>, strengths: Vec<T>) -> Self {
        assert_eq!(items.len(), strengths.len());
        let mut pairs: Vec<(ItemId, T)> = items.into_iter().zip(strengths).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let total: T = pairs.iter().map(|p| p.1).sum();
        let (items, strengths) = pairs.into_iter().map(|(i, s)| (i, s / total)).unzip();
        Self { items, strengths }
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn values(&self) -> &[T] {
        &self.strengths
    }

    pub fn get(&self, item: &str) -> Option<T> {
        self.items
            .binary_search_by(|i| i.as_str().cmp(item))
            .ok()
            .map(|idx| self.strengths[idx])
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> + '_ {
        self.items
            .iter()
            .map(String::as_str)
            .zip(self.strengths.iter().copied())
    }
}

/// Per-item intimacy in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntimacyScore<T> {
    pub scores: BTreeMap<ItemId, T>,
    /// True when every strength was equal and all scores were set to 0.
    pub degenerate: bool,
}

impl<T: Scalar> IntimacyScore<T> {
    pub fn get(&self, item: &str) -> Option<T> {
        self.scores.get(item).copied()
    }
}

/// Min-max scales log-strengths onto [-1, 1].
pub fn strengths_to_scores<T: Scalar>(strengths: &BtlStrengths<T>) -> IntimacyScore<T> {
    let logs: Vec<T> = strengths.values().iter().map(|p| p.ln()).collect();
    let lo = logs.iter().copied().fold(T::infinity(), T::min);
    let hi = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let range = hi - lo;
    let degenerate = !(range > T::zero());
    if degenerate {
        log::warn!("all strengths equal; scores set to 0");
    }
    let two = T::of(2.0);
    let scores = strengths
        .items()
        .iter()
        .zip(&logs)
        .map(|(id, &l)| {
            let s = if degenerate {
                T::zero()
            } else if l == hi {
                T::one()
            } else if l == lo {
                -T::one()
            } else {
                two * (l - lo) / range - T::one()
            };
            (id.clone(), s)
        })
        .collect();
    IntimacyScore { scores, degenerate }
}

/// Expands every judgment against its tuple.
pub fn expand_all(records: &[(Tuple4, Judgment)]) -> Result<Vec<PairwiseComparison>, BwsError> {
    let mut out = Vec::with_capacity(records.len() * 5);
    for (tuple, judgment) in records {
        out.extend(expand_pairs(judgment, tuple)?);
    }
    Ok(out)
}

/// Judgments → comparisons → ILSR → scores.
pub fn score_judgments<T: Scalar>(
    records: &[(Tuple4, Judgment)],
    params: &IlsrParams<T>,
) -> Result<IntimacyScore<T>, BwsError> {
    let comparisons = expand_all(records)?;
    Ok(strengths_to_scores(&ilsr(&comparisons, params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(ids: [&str; 4]) -> Tuple4 {
        Tuple4::new("t", ids.map(String::from)).unwrap()
    }

    fn judgment(best: &str, worst: &str) -> Judgment {
        Judgment {
            tuple_id: "t".into(),
            best: best.into(),
            worst: worst.into(),
            annotator_id: "a".into(),
            timestamp: None,
        }
    }

    fn pairs(out: &[PairwiseComparison]) -> Vec<(&str, &str)> {
        let mut v: Vec<_> = out.iter().map(|p| (p.winner.as_str(), p.loser.as_str())).collect();
        v.sort();
        v
    }

    #[test]
    fn five_pairs_without_middle() {
        let t = tuple(["q1", "q2", "q3", "q4"]);
        let out = expand_pairs(&judgment("q1", "q4"), &t).unwrap();
        assert_eq!(
            pairs(&out),
            vec![("q1", "q2"), ("q1", "q3"), ("q1", "q4"), ("q2", "q4"), ("q3", "q4")]
        );
    }

    #[test]
    fn relabeled_pick() {
        let t = tuple(["a", "b", "c", "d"]);
        let out = expand_pairs(&judgment("d", "a"), &t).unwrap();
        assert_eq!(
            pairs(&out),
            vec![("b", "a"), ("c", "a"), ("d", "a"), ("d", "b"), ("d", "c")]
        );
    }

    #[test]
    fn invalid_judgments_rejected() {
        let t = tuple(["a", "b", "c", "d"]);
        assert!(expand_pairs(&judgment("a", "a"), &t).is_err());
        assert!(expand_pairs(&judgment("a", "z"), &t).is_err());
        assert!(Tuple4::new("x", ["a", "a", "b", "c"].map(String::from)).is_err());
    }

    #[test]
    fn scores_from_equal_strengths_are_zero() {
        let s = BtlStrengths::new(vec!["a".into(), "b".into()], vec![0.5f64, 0.5]);
        let sc = strengths_to_scores(&s);
        assert!(sc.degenerate);
        assert_eq!(sc.get("a"), Some(0.0));
        assert_eq!(sc.get("b"), Some(0.0));
    }

    #[test]
    fn log_min_max_scores() {
        // ln .7 = -0.356675, ln .2 = -1.609438, ln .1 = -2.302585
        // middle: 2 * 0.693147 / 1.945910 - 1 = -0.287586
        let s = BtlStrengths::new(vec!["x".into(), "y".into(), "z".into()], vec![0.7f64, 0.2, 0.1]);
        let sc = strengths_to_scores(&s);
        assert_eq!(sc.get("x"), Some(1.0));
        assert!((sc.get("y").unwrap() + 0.287_586).abs() < 1e-6);
        assert_eq!(sc.get("z"), Some(-1.0));
    }

    #[test]
    fn strengths_are_normalized_and_sorted() {
        let s = BtlStrengths::new(vec!["b".into(), "a".into()], vec![3.0f32, 1.0]);
        assert_eq!(s.items(), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.get("b"), Some(0.75));
        assert_eq!(s.get("nope"), None);
    }
}
