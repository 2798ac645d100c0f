//! Fitting, persisting and applying the baseline regressors as one unit.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, infer_topics, mean_predictor, train_lda_gibbs, train_ridge, LdaParams, ModelError, NgramVocabulary,
    RidgeModel, SparseRows, TopicModel, DEFAULT_LAMBDA, DEFAULT_VOCABULARY_SIZE,
};
use crate::scalar::Scalar;

pub const ARTIFACT_FORMAT: &str = "intimacy-model";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureKind {
    Mean,
    BagOfWords,
    Topics { topics: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub features: FeatureKind,
    pub lambda: f64,
    pub vocabulary_size: usize,
    pub lda_iterations: usize,
    pub infer_iterations: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            features: FeatureKind::BagOfWords,
            lambda: DEFAULT_LAMBDA,
            vocabulary_size: DEFAULT_VOCABULARY_SIZE,
            lda_iterations: super::DEFAULT_ITERATIONS,
            infer_iterations: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelArtifact<T> {
    Mean {
        value: T,
    },
    BagOfWords {
        vocabulary: NgramVocabulary,
        ridge: RidgeModel<T>,
    },
    Topics {
        topic_model: TopicModel<T>,
        ridge: RidgeModel<T>,
        infer_iterations: usize,
    },
}

/// FNV-1a; gives each text its own inference seed independent of batch order.
fn text_seed(base: u64, text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ base;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn topic_features<T: Scalar, S: AsRef<str> + Sync>(
    model: &TopicModel<T>,
    texts: &[S],
    iterations: usize,
) -> SparseRows<T> {
    let rows: Vec<Vec<T>> = texts
        .par_iter()
        .map(|t| infer_topics(model, t.as_ref(), iterations, text_seed(model.seed, t.as_ref())))
        .collect();
    let mut m = SparseRows::new(model.topics);
    for r in rows {
        m.push_row(r.into_iter().enumerate().collect());
    }
    m
}

impl<T: Scalar> ModelArtifact<T> {
    /// Fits on training texts and targets. `topic_corpus` supplies extra
    /// unlabeled texts for the topic model (the training texts are always included).
    pub fn fit<S: AsRef<str> + Sync>(
        config: &TrainConfig,
        texts: &[S],
        y: &[T],
        topic_corpus: &[S],
    ) -> Result<Self, ModelError> {
        if texts.len() != y.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} texts, {} targets",
                texts.len(),
                y.len()
            )));
        }
        let lambda = T::of(config.lambda);
        match config.features {
            FeatureKind::Mean => Ok(ModelArtifact::Mean {
                value: mean_predictor(y)?.value,
            }),
            FeatureKind::BagOfWords => {
                let vocabulary = NgramVocabulary::build(texts, config.vocabulary_size);
                let x = vocabulary.features(texts);
                let ridge = train_ridge(&x, y, lambda)?;
                Ok(ModelArtifact::BagOfWords { vocabulary, ridge })
            }
            FeatureKind::Topics { topics } => {
                let corpus: Vec<&str> = texts.iter().chain(topic_corpus).map(AsRef::as_ref).collect();
                let mut params = LdaParams::with_topics(topics, config.seed);
                params.iterations = config.lda_iterations;
                let topic_model = train_lda_gibbs(&corpus, params)?;
                let x = topic_features(&topic_model, texts, config.infer_iterations);
                let ridge = train_ridge(&x, y, lambda)?;
                Ok(ModelArtifact::Topics {
                    topic_model,
                    ridge,
                    infer_iterations: config.infer_iterations,
                })
            }
        }
    }

    pub fn predict<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Result<Vec<T>, ModelError> {
        match self {
            ModelArtifact::Mean { value } => Ok(vec![*value; texts.len()]),
            ModelArtifact::BagOfWords { vocabulary, ridge } => ridge.predict(&vocabulary.features(texts)),
            ModelArtifact::Topics {
                topic_model,
                ridge,
                infer_iterations,
            } => ridge.predict(&topic_features(topic_model, texts, *infer_iterations)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModelArtifact::Mean { .. } => "Mean-value Predictor".into(),
            ModelArtifact::BagOfWords { .. } => "LR + Bag of Words".into(),
            ModelArtifact::Topics { topic_model, .. } => {
                format!("LR + {} topics", topic_model.topics)
            }
        }
    }

    fn reindex(&mut self) {
        match self {
            ModelArtifact::Mean { .. } => {}
            ModelArtifact::BagOfWords { vocabulary, .. } => vocabulary.reindex(),
            ModelArtifact::Topics { topic_model, .. } => topic_model.reindex(),
        }
    }
}

/// Versioned on-disk wrapper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactFile<T> {
    pub format: String,
    pub version: u32,
    pub config: TrainConfig,
    pub model: ModelArtifact<T>,
}

impl<T: Scalar> ArtifactFile<T> {
    pub fn new(config: TrainConfig, model: ModelArtifact<T>) -> Self {
        Self {
            format: ARTIFACT_FORMAT.into(),
            version: ARTIFACT_VERSION,
            config,
            model,
        }
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ModelError> {
        serde_json::to_writer(out, self).map_err(|e| ModelError::Artifact(e.to_string()))
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ModelError> {
        let mut file: Self = serde_json::from_reader(input).map_err(|e| ModelError::Artifact(e.to_string()))?;
        if file.format != ARTIFACT_FORMAT || file.version != ARTIFACT_VERSION {
            return Err(ModelError::Artifact(format!("{} v{}", file.format, file.version)));
        }
        file.model.reindex();
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub model: String,
    pub topics: usize,
    pub mse: T,
    pub pearson_r: T,
}

/// Fits one topic-feature regressor per topic count and scores each on the held-out set.
pub fn topic_sweep<T: Scalar, S: AsRef<str> + Sync>(
    base: &TrainConfig,
    topic_counts: &[usize],
    train: (&[S], &[T]),
    test: (&[S], &[T]),
    topic_corpus: &[S],
) -> Result<Vec<SweepRow<T>>, ModelError> {
    topic_counts
        .par_iter()
        .map(|&k| {
            let config = TrainConfig {
                features: FeatureKind::Topics { topics: k },
                ..base.clone()
            };
            let model = ModelArtifact::fit(&config, train.0, train.1, topic_corpus)?;
            let eval = evaluate(&model.predict(test.0)?, test.1)?;
            Ok(SweepRow {
                model: model.name(),
                topics: k,
                mse: eval.mse,
                pearson_r: eval.pearson_r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<String>, Vec<f64>) {
        let texts = vec![
            "what is your deepest fear".to_string(),
            "what is the capital of france".into(),
            "do you ever feel lonely at night".into(),
            "how do I fix a flat tire".into(),
            "have you ever been in love".into(),
            "which phone has the best camera".into(),
        ];
        (texts, vec![0.8, -0.7, 0.6, -0.6, 0.7, -0.8])
    }

    #[test]
    fn bag_of_words_round_trip() {
        let (texts, y) = toy();
        let config = TrainConfig::default();
        let model = ModelArtifact::fit(&config, &texts, &y, &[]).unwrap();
        let file = ArtifactFile::new(config, model);
        let mut buf = Vec::new();
        file.save(&mut buf).unwrap();
        let back: ArtifactFile<f64> = ArtifactFile::load(buf.as_slice()).unwrap();
        assert_eq!(back.model.predict(&texts).unwrap(), file.model.predict(&texts).unwrap());
    }

    #[test]
    fn topic_model_round_trip() {
        let (texts, y) = toy();
        let config = TrainConfig {
            features: FeatureKind::Topics { topics: 3 },
            lda_iterations: 20,
            infer_iterations: 10,
            ..Default::default()
        };
        let model = ModelArtifact::fit(&config, &texts, &y, &[]).unwrap();
        assert_eq!(model.name(), "LR + 3 topics");
        let file = ArtifactFile::new(config, model);
        let mut buf = Vec::new();
        file.save(&mut buf).unwrap();
        let back: ArtifactFile<f64> = ArtifactFile::load(buf.as_slice()).unwrap();
        assert_eq!(back.model.predict(&texts).unwrap(), file.model.predict(&texts).unwrap());
    }

    #[test]
    fn wrong_version_rejected() {
        let json = r#"{"format":"intimacy-model","version":99,"config":{"features":{"kind":"mean"},"lambda":1.0,"vocabulary_size":1,"lda_iterations":1,"infer_iterations":1,"seed":0},"model":{"kind":"mean","value":0.0}}"#;
        assert!(ArtifactFile::<f64>::load(json.as_bytes()).is_err());
    }
}
