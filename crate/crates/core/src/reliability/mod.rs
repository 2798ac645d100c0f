//! Annotation quality: correlation, split-half ranking reliability,
//! Krippendorff's alpha, and model-vs-human pairwise validation.

mod alpha;
mod pairwise;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bws::{self, IlsrParams, Judgment, Tuple4};
use crate::scalar::Scalar;
use crate::stats::{derive_seed, mean, rng};

pub use alpha::{bws_alpha_units, krippendorff_alpha};
pub use pairwise::{
    pairwise_validation, plan_validation_pairs, read_pair_judgments, write_bins, BinReport, HumanLabel, PairJudgment,
    PlannedPair,
};

#[derive(Debug, Error)]
pub enum ReliabilityError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations")]
    TooShort,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no unit carries two or more annotations")]
    NoOverlap,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Product-moment correlation; 0 when either side is constant.
pub fn pearson_r<T: Scalar>(x: &[T], y: &[T]) -> Result<T, ReliabilityError> {
    if x.len() != y.len() {
        return Err(ReliabilityError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(ReliabilityError::TooShort);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Ok(T::zero());
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport<T> {
    pub shr_mean: T,
    pub shr_per_resample: Vec<T>,
    pub krippendorff_alpha: Option<T>,
    pub notes: Vec<String>,
}

/// Scores two halves independently and correlates items judged in both.
pub fn split_half_with<T: Scalar>(
    first: &[(Tuple4, Judgment)],
    second: &[(Tuple4, Judgment)],
    params: &IlsrParams<T>,
) -> Result<T, ReliabilityError> {
    let fit = |half: &[(Tuple4, Judgment)]| {
        bws::score_judgments(half, params).map_err(|e| ReliabilityError::InsufficientData(e.to_string()))
    };
    let (a, b) = (fit(first)?, fit(second)?);
    let (xs, ys): (Vec<T>, Vec<T>) = a.scores.iter().filter_map(|(id, &s)| b.get(id).map(|t| (s, t))).unzip();
    if xs.len() < 2 {
        return Err(ReliabilityError::InsufficientData(format!(
            "{} item(s) scored in both halves",
            xs.len()
        )));
    }
    pearson_r(&xs, &ys)
}

/// Split-half ranking over `resamples` random halvings of the judgment records.
/// Resample `k` is shuffled with `derive_seed(seed, k)`.
pub fn split_half_ranking<T: Scalar>(
    records: &[(Tuple4, Judgment)],
    resamples: usize,
    seed: u64,
    params: &IlsrParams<T>,
) -> Result<(T, Vec<T>), ReliabilityError> {
    if records.len() < 2 || resamples == 0 {
        return Err(ReliabilityError::InsufficientData(
            "need ≥ 2 judgments and ≥ 1 resample".into(),
        ));
    }
    let per: Vec<T> = (0..resamples)
        .into_par_iter()
        .map(|k| {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.shuffle(&mut rng(derive_seed(seed, k as u64)));
            let half = records.len() / 2;
            let pick = |ix: &[usize]| ix.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
            split_half_with(&pick(&order[..half]), &pick(&order[half..]), params)
        })
        .collect::<Result<_, _>>()?;
    Ok((mean(&per), per))
}

/// SHR plus α over the best/worst units of tuples judged by several annotators.
pub fn reliability_report<T: Scalar>(
    records: &[(Tuple4, Judgment)],
    resamples: usize,
    seed: u64,
    params: &IlsrParams<T>,
) -> Result<ReliabilityReport<T>, ReliabilityError> {
    let (shr_mean, shr_per_resample) = split_half_ranking(records, resamples, seed, params)?;
    let judgments: Vec<Judgment> = records.iter().map(|(_, j)| j.clone()).collect();
    let mut notes = Vec::new();
    let krippendorff_alpha = match krippendorff_alpha::<T, String>(&bws_alpha_units(&judgments)) {
        Ok(a) => {
            let shared: BTreeMap<&str, usize> = judgments.iter().fold(BTreeMap::new(), |mut m, j| {
                *m.entry(j.tuple_id.as_str()).or_default() += 1;
                m
            });
            notes.push(format!(
                "alpha over {} multiply-annotated tuples",
                shared.values().filter(|&&c| c >= 2).count()
            ));
            Some(a)
        }
        Err(_) => {
            notes.push("alpha not computed: no tuple judged by two annotators".into());
            None
        }
    };
    Ok(ReliabilityReport {
        shr_mean,
        shr_per_resample,
        krippendorff_alpha,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0f64).abs() < 1e-15);
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0f64).abs() < 1e-15);
        // deviations (-1.5,-.5,.5,1.5) and (-.5,-1.5,1.5,.5): sxy = 3, sxx = syy = 5
        assert!((pearson_r(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6f64).abs() < 1e-12);
    }

    #[test]
    fn pearson_constant_and_errors() {
        assert_eq!(pearson_r(&[1.0f64, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(pearson_r(&[1.0f64], &[1.0]), Err(ReliabilityError::TooShort)));
        assert!(matches!(
            pearson_r(&[1.0f64, 2.0], &[1.0]),
            Err(ReliabilityError::LengthMismatch(2, 1))
        ));
    }

    fn record(id: &str, items: [&str; 4], best: &str, worst: &str, who: &str) -> (Tuple4, Judgment) {
        (
            Tuple4::new(id, items.map(String::from)).unwrap(),
            Judgment {
                tuple_id: id.into(),
                best: best.into(),
                worst: worst.into(),
                annotator_id: who.into(),
                timestamp: None,
            },
        )
    }

    #[test]
    fn duplicated_halves_correlate_perfectly() {
        let half = vec![
            record("t1", ["a", "b", "c", "d"], "a", "d", "x"),
            record("t2", ["a", "c", "e", "f"], "c", "f", "x"),
            record("t3", ["b", "d", "e", "f"], "e", "d", "x"),
            record("t4", ["a", "b", "e", "f"], "b", "a", "x"),
        ];
        let r: f64 = split_half_with(&half, &half, &IlsrParams::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_includes_alpha_for_shared_tuples() {
        let recs = vec![
            record("t1", ["a", "b", "c", "d"], "a", "d", "x"),
            record("t1", ["a", "b", "c", "d"], "a", "c", "y"),
            record("t2", ["a", "c", "e", "f"], "c", "f", "x"),
            record("t2", ["a", "c", "e", "f"], "c", "f", "y"),
        ];
        let rep: ReliabilityReport<f64> = reliability_report(&recs, 3, 1, &IlsrParams::default()).unwrap();
        assert_eq!(rep.shr_per_resample.len(), 3);
        assert!(rep.krippendorff_alpha.is_some());
    }
}
