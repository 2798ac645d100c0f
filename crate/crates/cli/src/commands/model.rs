//! Intimacy regressors: training, prediction, evaluation and the topic-count sweep.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use intimacy_core::models::{self, ArtifactFile, DataSplit, FeatureKind, ModelArtifact, TrainConfig};

use crate::rows::LabeledQuestion;
use crate::util::{echo_config, open, read_csv, write_atomic, write_csv, write_json};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Features {
    Mean,
    BagOfWords,
    Topics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Train,
    Validation,
    Test,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    /// Seed of the 8:1:1 train/validation/test split over question ids.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

impl SplitArgs {
    fn split(&self, rows: &[LabeledQuestion]) -> Result<DataSplit, CliError> {
        let ids: Vec<String> = rows.iter().map(|r| r.question_id.clone()).collect();
        Ok(models::split_dataset(&ids, (8, 1, 1), self.split_seed)?)
    }
}

fn select<'a>(rows: &'a [LabeledQuestion], split: &DataSplit, part: Part) -> Vec<&'a LabeledQuestion> {
    let ids: &[String] = match part {
        Part::Train => &split.train,
        Part::Validation => &split.validation,
        Part::Test => &split.test,
        Part::All => return rows.iter().collect(),
    };
    let by_id: HashMap<&str, &LabeledQuestion> = rows.iter().map(|r| (r.question_id.as_str(), r)).collect();
    ids.iter().map(|id| by_id[id.as_str()]).collect()
}

fn unzip(rows: &[&LabeledQuestion]) -> (Vec<String>, Vec<f64>) {
    rows.iter().map(|r| (r.text.clone(), r.score)).unzip()
}

#[derive(Debug, Deserialize)]
struct TextRow {
    question_id: String,
    text: String,
}

fn topic_corpus(path: &Option<PathBuf>) -> Result<Vec<String>, CliError> {
    match path {
        Some(p) => Ok(read_csv::<TextRow>(p)?.into_iter().map(|r| r.text).collect()),
        None => Ok(Vec::new()),
    }
}

fn load_labeled(path: &Path) -> Result<Vec<LabeledQuestion>, CliError> {
    let rows: Vec<LabeledQuestion> = read_csv(path)?;
    if let Some(r) = rows.iter().find(|r| !r.score.is_finite()) {
        return Err(CliError::Data(format!(
            "{}: non-finite score for {}",
            path.display(),
            r.question_id
        )));
    }
    Ok(rows)
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Features::BagOfWords)]
    pub features: Features,
    /// Topic count for --features topics.
    #[arg(long, default_value_t = 50)]
    pub topics: usize,
    /// Ridge penalty.
    #[arg(long, default_value_t = models::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Most frequent 1–3-grams kept as features.
    #[arg(long, default_value_t = models::DEFAULT_VOCABULARY_SIZE)]
    pub vocabulary_size: usize,
    /// Gibbs sweeps when fitting topics.
    #[arg(long, default_value_t = models::DEFAULT_ITERATIONS)]
    pub lda_iterations: usize,
    /// Gibbs sweeps when inferring topic mixtures of new texts.
    #[arg(long, default_value_t = 50)]
    pub infer_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    fn config(&self, topics: usize) -> TrainConfig {
        TrainConfig {
            features: match self.features {
                Features::Mean => FeatureKind::Mean,
                Features::BagOfWords => FeatureKind::BagOfWords,
                Features::Topics => FeatureKind::Topics { topics },
            },
            lambda: self.lambda,
            vocabulary_size: self.vocabulary_size,
            lda_iterations: self.lda_iterations,
            infer_iterations: self.infer_iterations,
            seed: self.seed,
        }
    }
}

/// Fits a regressor on the training part of a labeled corpus.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV question_id,text,score. Output: versioned JSON model \
artifact {version, config, model}.")]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Extra unlabeled texts (CSV with question_id,text) for the topic model.
    #[arg(long)]
    pub topic_corpus: Option<PathBuf>,
}

pub fn train(a: TrainArgs) -> Result<(), CliError> {
    let rows = load_labeled(&a.data)?;
    let split = a.split.split(&rows)?;
    let (texts, y) = unzip(&select(&rows, &split, Part::Train));
    let extra = topic_corpus(&a.topic_corpus)?;
    let config = a.model.config(a.model.topics);
    let model = ModelArtifact::<f64>::fit(&config, &texts, &y, &extra)?;
    let file = ArtifactFile::new(config, model);
    write_atomic(&a.output, |w| Ok(file.save(w)?))?;
    echo_config(&a.output, "train", &a)
}

fn load_model(path: &Path) -> Result<ModelArtifact<f64>, CliError> {
    Ok(ArtifactFile::<f64>::load(open(path)?)?.model)
}

/// Scores new questions with a trained model.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV with question_id and text columns. Output: CSV \
question_id,score in input order.")]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn predict(a: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let rows: Vec<TextRow> = read_csv(&a.input)?;
    let texts: Vec<&str> = rows.iter().map(|r| r.text.as_str()).collect();
    let scores = model.predict(&texts)?;
    let out: Vec<(String, f64)> = rows.into_iter().map(|r| r.question_id).zip(scores).collect();
    write_atomic(&a.output, |w| Ok(models::write_predictions(w, &out)?))?;
    echo_config(&a.output, "predict", &a)
}

/// MSE and Pearson r of a model (or external predictions) on one split part.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: JSON {model, part, n, mse, pearson_r}. External \
predictions are a CSV question_id,score (header optional) covering every evaluated id.")]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, required_unless_present = "predictions", conflicts_with = "predictions")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    model: String,
    part: Part,
    n: usize,
    mse: f64,
    pearson_r: f64,
}

pub fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let rows = load_labeled(&a.data)?;
    let split = a.split.split(&rows)?;
    let chosen = select(&rows, &split, a.part);
    let (texts, gold) = unzip(&chosen);
    let (name, pred) = match (&a.model, &a.predictions) {
        (Some(m), _) => {
            let model = load_model(m)?;
            (model.name(), model.predict(&texts)?)
        }
        (None, Some(p)) => {
            let ext = models::ingest_external_scores::<_, f64>(open(p)?)?;
            let pred = chosen
                .iter()
                .map(|r| {
                    ext.get(&r.question_id)
                        .copied()
                        .ok_or_else(|| CliError::Data(format!("no prediction for {}", r.question_id)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (format!("external:{}", p.display()), pred)
        }
        (None, None) => return Err(CliError::Usage("pass --model or --predictions".into())),
    };
    let e = models::evaluate(&pred, &gold)?;
    let report = EvalReport {
        model: name,
        part: a.part,
        n: gold.len(),
        mse: e.mse,
        pearson_r: e.pearson_r,
    };
    write_json(&a.output, &report)?;
    echo_config(&a.output, "evaluate", &a)
}

/// Topic-feature regressors at several topic counts, scored on the test part.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: CSV model,topics,mse,pearson_r, one row per topic count.")]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [20, 50, 100, 200])]
    pub topic_counts: Vec<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long)]
    pub topic_corpus: Option<PathBuf>,
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.topic_counts.iter().any(|&k| k == 0) {
        return Err(CliError::Usage("topic counts must be positive".into()));
    }
    let rows = load_labeled(&a.data)?;
    let split = a.split.split(&rows)?;
    let (train_x, train_y) = unzip(&select(&rows, &split, Part::Train));
    let (test_x, test_y) = unzip(&select(&rows, &split, Part::Test));
    let extra = topic_corpus(&a.topic_corpus)?;
    let base = TrainConfig {
        features: FeatureKind::Topics { topics: 0 },
        ..a.model.config(0)
    };
    let table = models::topic_sweep(&base, &a.topic_counts, (&train_x, &train_y), (&test_x, &test_y), &extra)?;
    write_csv(&a.output, &table)?;
    echo_config(&a.output, "topic-sweep", &a)
}
