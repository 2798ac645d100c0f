//! Baseline intimacy regressors and their evaluation.

pub mod artifact;
mod lda;
mod ngram;
mod ridge;

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reliability::pearson_r;
use crate::scalar::Scalar;
use crate::stats::{mean, rng};

pub use artifact::{topic_sweep, ArtifactFile, FeatureKind, ModelArtifact, SweepRow, TrainConfig};
pub use lda::{infer_topics, train_lda_gibbs, GibbsSampler, LdaParams, TopicModel, DEFAULT_BETA, DEFAULT_ITERATIONS};
pub use ngram::{build_ngram_features, ngrams, NgramVocabulary, SparseRows, DEFAULT_VOCABULARY_SIZE, MAX_NGRAM};
pub use ridge::{train_ridge, RidgeModel, DEFAULT_LAMBDA};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unsupported artifact: {0}")]
    Artifact(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

/// Seeded shuffle, then cut by `ratios` (train, validation, test).
pub fn split_dataset(ids: &[String], ratios: (usize, usize, usize), seed: u64) -> Result<DataSplit, ModelError> {
    if ids.len() < 10 {
        return Err(ModelError::TooFewItems {
            needed: 10,
            got: ids.len(),
        });
    }
    let total = ratios.0 + ratios.1 + ratios.2;
    if total == 0 {
        return Err(ModelError::InvalidParameter("ratios sum to zero".into()));
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut rng(seed));
    let n = ids.len() as f64;
    let n_train = (n * ratios.0 as f64 / total as f64).round() as usize;
    let n_val = (n * ratios.1 as f64 / total as f64).round() as usize;
    let n_val = n_val.min(ids.len() - n_train);
    let test = shuffled.split_off(n_train + n_val);
    let validation = shuffled.split_off(n_train);
    Ok(DataSplit {
        train: shuffled,
        validation,
        test,
        seed,
    })
}

/// Predicts the training mean for every input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPredictor<T> {
    pub value: T,
}

impl<T: Scalar> MeanPredictor<T> {
    pub fn predict(&self, n: usize) -> Vec<T> {
        vec![self.value; n]
    }
}

pub fn mean_predictor<T: Scalar>(y_train: &[T]) -> Result<MeanPredictor<T>, ModelError> {
    if y_train.is_empty() {
        return Err(ModelError::TooFewItems { needed: 1, got: 0 });
    }
    Ok(MeanPredictor { value: mean(y_train) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult<T> {
    pub mse: T,
    pub pearson_r: T,
}

pub fn evaluate<T: Scalar>(predictions: &[T], gold: &[T]) -> Result<EvalResult<T>, ModelError> {
    if predictions.len() != gold.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} predictions, {} gold values",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(ModelError::TooFewItems { needed: 1, got: 0 });
    }
    let mse = predictions
        .iter()
        .zip(gold)
        .map(|(&p, &g)| (p - g) * (p - g))
        .sum::<T>()
        / T::of_usize(gold.len());
    let pearson_r = if gold.len() < 2 {
        T::zero()
    } else {
        pearson_r(predictions, gold).map_err(|e| ModelError::DimensionMismatch(e.to_string()))?
    };
    Ok(EvalResult { mse, pearson_r })
}

/// Reads `question_id,score` rows. A leading header row is skipped; scores
/// must be finite and ids unique.
pub fn ingest_external_scores<R: Read, T: Scalar>(input: R) -> Result<BTreeMap<String, T>, ModelError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut out = BTreeMap::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 1;
        let rec = rec.map_err(|e| ModelError::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(ModelError::Parse {
                line,
                message: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let (id, raw) = (rec[0].trim(), rec[1].trim());
        if line == 1 && raw.eq_ignore_ascii_case("score") {
            continue;
        }
        let score = raw
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or_else(|| ModelError::Parse {
                line,
                message: format!("score {raw:?} is not a finite number"),
            })?;
        if out.insert(id.to_string(), T::of(score)).is_some() {
            return Err(ModelError::DuplicateId(id.to_string()));
        }
    }
    Ok(out)
}

/// Writes `question_id,score` rows in the given order.
pub fn write_predictions<W: Write, T: Scalar>(out: W, rows: &[(String, T)]) -> Result<(), ModelError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ModelError::Io(std::io::Error::other(e));
    w.write_record(["question_id", "score"]).map_err(io)?;
    for (id, s) in rows {
        w.write_record([id.as_str(), &s.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Ids present in more than one part of a split (empty for a valid split).
pub fn split_overlap(split: &DataSplit) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dup = Vec::new();
    for id in split.train.iter().chain(&split.validation).chain(&split.test) {
        if !seen.insert(id) {
            dup.push(id.clone());
        }
    }
    dup
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i}")).collect()
    }

    #[test]
    fn split_sizes() {
        let s = split_dataset(&ids(10), (8, 1, 1), 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        let s = split_dataset(&ids(2247), (8, 1, 1), 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (1798, 225, 224));
        assert!(split_overlap(&s).is_empty());
        assert!(matches!(
            split_dataset(&ids(9), (8, 1, 1), 0),
            Err(ModelError::TooFewItems { .. })
        ));
    }

    #[test]
    fn split_is_seeded() {
        assert_eq!(
            split_dataset(&ids(50), (8, 1, 1), 3).unwrap(),
            split_dataset(&ids(50), (8, 1, 1), 3).unwrap()
        );
        assert_ne!(
            split_dataset(&ids(50), (8, 1, 1), 3).unwrap(),
            split_dataset(&ids(50), (8, 1, 1), 4).unwrap()
        );
    }

    #[test]
    fn mean_predictor_examples() {
        let m = mean_predictor(&[-1.0f64, 1.0]).unwrap();
        assert_eq!(m.predict(3), vec![0.0; 3]);
        let e = evaluate(&m.predict(3), &[0.5, -0.2, 0.1]).unwrap();
        assert_eq!(e.pearson_r, 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let gold = [0.1f64, -0.4, 0.7, 0.0];
        let e = evaluate(&gold, &gold).unwrap();
        assert_eq!(e.mse, 0.0);
        assert!((e.pearson_r - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = gold.iter().map(|g| g + 0.1).collect();
        let e = evaluate(&shifted, &gold).unwrap();
        assert!((e.mse - 0.01).abs() < 1e-12);
        assert!((e.pearson_r - 1.0).abs() < 1e-12);
        // residuals (1, -1, 0) -> mse 2/3; r of (1,1,3) vs (0,2,3): sxy=8/3, sxx=8/3, syy=14/3
        let e = evaluate(&[1.0f64, 1.0, 3.0], &[0.0, 2.0, 3.0]).unwrap();
        assert!((e.mse - 2.0 / 3.0).abs() < 1e-12);
        assert!((e.pearson_r - (8.0 / 3.0) / (8.0f64 / 3.0 * 14.0 / 3.0).sqrt()).abs() < 1e-12);
        assert!(evaluate(&[1.0f64], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ingest_scores() {
        let m: BTreeMap<String, f64> =
            ingest_external_scores("question_id,score\na,0.5\nb,-1\nc,0.25\n".as_bytes()).unwrap();
        assert_eq!(m.len(), 3);
        let m: BTreeMap<String, f64> = ingest_external_scores("a,0.5\nb,-1\nc,0.25\n".as_bytes()).unwrap();
        assert_eq!(m.len(), 3);
        match ingest_external_scores::<_, f64>("a,1\na,2\n".as_bytes()) {
            Err(ModelError::DuplicateId(id)) => assert_eq!(id, "a"),
            other => panic!("{other:?}"),
        }
        match ingest_external_scores::<_, f64>("a,1\nb,NaN\n".as_bytes()) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
