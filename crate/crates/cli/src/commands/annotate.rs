//! Corpus extraction, tuple generation, the annotation server, scoring and
//! reliability.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};

use intimacy_core::bws::{self, IlsrParams};
use intimacy_core::corpus::{self, AbbreviationTable, Cleaner, DomainRules, Question};
use intimacy_core::reliability;
use intimacy_service::{AnnotationService, ServiceConfig, TupleSet};

use crate::util::{echo_config, open, write_atomic, write_csv, write_json};
use crate::CliError;

/// Raw JSONL items to cleaned questions.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: JSONL, one object per input item in input order: \
{id, domain, text, metadata, rejected?}. Rejected items keep their original text \
and carry a reason (no_question_mark, multi_sentence, too_short, ...).")]
pub struct ExtractArgs {
    /// JSONL of {id, domain, text, metadata?}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Two-column TSV of abbreviation and expansion (replaces the built-in
    /// AITA entry).
    #[arg(long)]
    pub abbreviations: Option<PathBuf>,
    /// Two-column TSV of Twitter handle and display name.
    #[arg(long)]
    pub display_names: Option<PathBuf>,
    /// Keep leading "Members of r/X," clauses in Reddit titles.
    #[arg(long)]
    pub keep_address_terms: bool,
}

pub fn extract(a: ExtractArgs) -> Result<(), CliError> {
    let raw = corpus::io::read_raw_items(open(&a.input)?)?;
    let table = match &a.abbreviations {
        Some(p) => AbbreviationTable::from_tsv(open(p)?)?,
        None => AbbreviationTable::default(),
    };
    let rules = DomainRules {
        display_names: match &a.display_names {
            Some(p) => corpus::io::read_display_names(open(p)?)?,
            None => HashMap::new(),
        },
        strip_address_terms: !a.keep_address_terms,
    };
    let (accepted, rejected) = corpus::extract_questions(&raw, &Cleaner::new(table), &rules);
    write_atomic(&a.output, |w| {
        Ok(corpus::io::write_extraction(w, &raw, &accepted, &rejected)?)
    })?;
    eprintln!("{} questions, {} rejected", accepted.len(), rejected.len());
    echo_config(&a.output, "extract", &a)
}

fn accepted_questions(path: &PathBuf) -> Result<Vec<Question>, CliError> {
    Ok(corpus::io::read_questions(open(path)?)?
        .into_iter()
        .filter(|q| q.rejected.is_none())
        .collect())
}

/// Four-question tuples for best-worst annotation.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: CSV tuple_id,item1,item2,item3,item4.")]
pub struct TuplesArgs {
    /// Questions JSONL (rejected rows are ignored).
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub tuples_per_item: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn tuples(a: TuplesArgs) -> Result<(), CliError> {
    let ids: Vec<String> = accepted_questions(&a.questions)?.into_iter().map(|q| q.id).collect();
    let tuples = bws::generate_tuples(&ids, a.tuples_per_item, a.seed)?;
    write_atomic(&a.output, |w| Ok(bws::io::write_tuples(w, &tuples)?))?;
    echo_config(&a.output, "tuples", &a)
}

/// Runs the annotation HTTP service until Ctrl-C.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Judgments are journaled under --journal-dir as <set>.jsonl and \
exported from GET /tuple-sets/<set>/export as CSV \
tuple_id,item1,item2,item3,item4,best,worst,annotator_id,timestamp.")]
pub struct ServeArgs {
    #[arg(long)]
    pub tuples: PathBuf,
    /// Questions JSONL providing the texts shown to annotators.
    #[arg(long)]
    pub questions: PathBuf,
    /// Tuple set id (defaults to the tuples file stem).
    #[arg(long)]
    pub set_id: Option<String>,
    #[arg(long, env = "INTIMACY_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, env = "INTIMACY_JOURNAL_DIR", default_value = "journal")]
    pub journal_dir: PathBuf,
    /// Seeds each session's tuple order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plain-text instructions served at /instructions.
    #[arg(long)]
    pub instructions: Option<PathBuf>,
}

const DEFAULT_INSTRUCTIONS: &str = "Each screen shows four questions. Pick the one that feels most \
intimate to ask and the one that feels least intimate. Judge the question itself, not who might ask it.\n";

pub fn serve(a: ServeArgs) -> Result<(), CliError> {
    let tuples = bws::io::read_tuples(open(&a.tuples)?)?;
    let texts: HashMap<String, String> = accepted_questions(&a.questions)?
        .into_iter()
        .map(|q| (q.id, q.text))
        .collect();
    let id = match &a.set_id {
        Some(s) => s.clone(),
        None => a
            .tuples
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Usage("cannot derive a set id; pass --set-id".into()))?,
    };
    let instructions = match &a.instructions {
        Some(p) => std::fs::read_to_string(p)?,
        None => DEFAULT_INSTRUCTIONS.to_string(),
    };
    let config = ServiceConfig {
        journal_dir: a.journal_dir.clone(),
        seed: a.seed,
        instructions,
    };
    let service = AnnotationService::open(config, vec![TupleSet { id, tuples, texts }])?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(intimacy_service::serve(Arc::new(service), a.addr))?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct IlsrArgs {
    /// Pseudo-comparisons added per ordered item pair.
    #[arg(long, default_value_t = 0.01)]
    pub regularization: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
}

impl IlsrArgs {
    fn params(&self) -> IlsrParams<f64> {
        IlsrParams {
            regularization: self.regularization,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

/// Best-worst judgments to per-question scores in [-1, 1].
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: CSV item_id,score sorted by item id; the most intimate \
item scores 1 and the least -1.")]
pub struct ScoreArgs {
    /// Judgment CSV as exported by the service.
    #[arg(long)]
    pub judgments: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub ilsr: IlsrArgs,
}

pub fn score(a: ScoreArgs) -> Result<(), CliError> {
    let records = bws::io::read_judgments(open(&a.judgments)?)?;
    let scores = bws::score_judgments(&records, &a.ilsr.params())?;
    write_atomic(&a.output, |w| Ok(bws::io::write_scores(w, &scores)?))?;
    echo_config(&a.output, "score", &a)
}

/// Split-half ranking reliability and Krippendorff's alpha.
#[derive(Debug, Args, Serialize)]
#[command(
    after_help = "Output: JSON {shr_mean, shr_per_resample, krippendorff_alpha, notes}. \
alpha is null when no tuple has two annotations."
)]
pub struct ReliabilityArgs {
    #[arg(long)]
    pub judgments: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ilsr: IlsrArgs,
}

pub fn reliability(a: ReliabilityArgs) -> Result<(), CliError> {
    let records = bws::io::read_judgments(open(&a.judgments)?)?;
    let report = reliability::reliability_report(&records, a.resamples, a.seed, &a.ilsr.params())?;
    write_json(&a.output, &report)?;
    echo_config(&a.output, "reliability", &a)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    #[serde(alias = "item_id")]
    question_id: String,
    score: f64,
}

/// Samples question pairs by model-score gap for human validation.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Output: CSV pair_id,qa_id,qb_id,model_gap with qa the higher-scored \
question; bins are filled in order, per_bin rows each.")]
pub struct PlanPairsArgs {
    /// CSV with item_id (or question_id) and score columns.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, default_value_t = 30)]
    pub per_bin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn plan_pairs(a: PlanPairsArgs) -> Result<(), CliError> {
    let rows: Vec<ScoreRow> = crate::util::read_csv(&a.scores)?;
    let scores: Vec<(String, f64)> = rows.into_iter().map(|r| (r.question_id, r.score)).collect();
    let plan = reliability::plan_validation_pairs(&scores, a.bin_width, a.bins, a.per_bin, a.seed)?;
    write_csv(&a.output, &plan)?;
    echo_config(&a.output, "plan-pairs", &a)
}

/// Agreement between human pair labels and the model's ordering, per gap bin.
#[derive(Debug, Args, Serialize)]
#[command(
    after_help = "Input: CSV pair_id,qa_id,qb_id,model_gap,annotator_id,label with label \
a_more, b_more or same. Output: CSV bin_low,bin_high,n_pairs,alpha,agreement."
)]
pub struct ValidatePairsArgs {
    #[arg(long)]
    pub judgments: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
}

pub fn validate_pairs(a: ValidatePairsArgs) -> Result<(), CliError> {
    let judgments = reliability::read_pair_judgments::<_, f64>(open(&a.judgments)?)?;
    let (bins, overall) = reliability::pairwise_validation(&judgments, a.bin_width);
    write_atomic(&a.output, |w| Ok(reliability::write_bins(w, &bins)?))?;
    eprintln!("overall agreement {overall:.3}");
    echo_config(&a.output, "validate-pairs", &a)
}
