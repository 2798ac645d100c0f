//! Writes a complete synthetic example bundle with planted effects.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use rand::Rng;
use serde::Serialize;

use intimacy_core::bws;
use intimacy_core::corpus::{Domain, Question};
use intimacy_core::reliability::{plan_validation_pairs, HumanLabel, PairJudgment};
use intimacy_core::stats::{derive_seed, rng};

use crate::synth::{self, TABLE_ANONYMITY, TABLE_DYADS};
use crate::util::{echo_config, write_atomic, write_csv};
use crate::CliError;

/// Generates the synthetic corpora used by the examples and end-to-end checks.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Writes into --output-dir: questions.jsonl, tuples.csv, judgments.csv \
(two annotators, Luce-model picks), truth.csv, pair_judgments.csv, labeled.csv, topics.csv, \
markers.csv, dyads.csv, anonymity.csv, mentions.csv and addressed.csv.")]
pub struct SynthArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Questions in the best-worst annotation set.
    #[arg(long, default_value_t = 200)]
    pub bws_items: usize,
    #[arg(long, default_value_t = 2000)]
    pub labeled: usize,
    #[arg(long, default_value_t = 5000)]
    pub topic_questions: usize,
}

#[derive(Serialize)]
struct TruthRow<'a> {
    question_id: &'a str,
    score: f64,
}

pub fn run(a: SynthArgs) -> Result<(), CliError> {
    let dir = &a.output_dir;
    let s = |k: u64| derive_seed(a.seed, k);

    // Best-worst annotation set.
    let pool = synth::labeled_corpus(a.bws_items, s(1));
    let questions: Vec<Question> = pool
        .iter()
        .enumerate()
        .map(|(i, q)| Question {
            id: format!("q{i:04}"),
            domain: Domain::ALL[i % Domain::ALL.len()],
            text: q.text.clone(),
            metadata: BTreeMap::new(),
            rejected: None,
        })
        .collect();
    let ids: Vec<String> = questions.iter().map(|q| q.id.clone()).collect();
    let mut r = rng(s(2));
    let truth: BTreeMap<String, f64> = ids.iter().map(|id| (id.clone(), r.random_range(-1.0..1.0))).collect();
    let tuples = bws::generate_tuples(&ids, 8, s(3))?;
    let mut records = synth::simulate_judgments(&truth, &tuples, "ann1", 3.0, s(4));
    records.extend(synth::simulate_judgments(&truth, &tuples, "ann2", 3.0, s(5)));
    write_atomic(&dir.join("questions.jsonl"), |w| {
        for q in &questions {
            serde_json::to_writer(&mut *w, q)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("tuples.csv"), |w| Ok(bws::io::write_tuples(w, &tuples)?))?;
    write_atomic(&dir.join("judgments.csv"), |w| {
        Ok(bws::io::write_judgments(w, &records)?)
    })?;
    let truth_rows: Vec<TruthRow> = truth
        .iter()
        .map(|(k, &v)| TruthRow {
            question_id: k,
            score: v,
        })
        .collect();
    write_csv(&dir.join("truth.csv"), &truth_rows)?;
    let truth_list: Vec<(String, f64)> = truth.iter().map(|(k, &v)| (k.clone(), v)).collect();
    write_csv(&dir.join("pair_judgments.csv"), &pair_judgments(&truth_list, s(6))?)?;

    write_csv(&dir.join("labeled.csv"), &synth::labeled_corpus(a.labeled, s(7)))?;
    write_csv(
        &dir.join("topics.csv"),
        &synth::topic_corpus(a.topic_questions, 20, s(8)),
    )?;
    write_csv(&dir.join("markers.csv"), &synth::marker_corpus(400, 0.5, 0.5, s(9)))?;
    write_csv(
        &dir.join("dyads.csv"),
        &synth::dyad_corpus(40, 3, 60, TABLE_DYADS, s(10)),
    )?;
    write_csv(
        &dir.join("anonymity.csv"),
        &synth::anonymity_corpus(50, 200, TABLE_ANONYMITY, s(11)),
    )?;
    let (events, addressed) = synth::distance_corpus(2000, 3000, s(12));
    write_mentions(&dir.join("mentions.csv"), &events)?;
    write_csv(&dir.join("addressed.csv"), &addressed)?;
    echo_config(&dir.join("synth"), "synth", &a)
}

/// Two annotators who follow the true ordering whenever the gap is at least
/// 0.2 and answer at random below that.
fn pair_judgments(truth: &[(String, f64)], seed: u64) -> Result<Vec<PairJudgment<f64>>, CliError> {
    let plan = plan_validation_pairs(truth, 0.1, 10, 30, seed)?;
    let mut r = rng(derive_seed(seed, 1));
    let labels = [HumanLabel::AMore, HumanLabel::BMore, HumanLabel::Same];
    let mut out = Vec::new();
    for p in &plan {
        for ann in ["h1", "h2"] {
            let label = if p.model_gap >= 0.2 {
                HumanLabel::AMore
            } else {
                labels[r.random_range(0..3)]
            };
            out.push(PairJudgment {
                pair_id: p.pair_id.clone(),
                question_a: p.qa_id.clone(),
                question_b: p.qb_id.clone(),
                model_gap: p.model_gap,
                annotator_id: ann.into(),
                human_label: label,
            });
        }
    }
    Ok(out)
}

fn write_mentions(path: &Path, events: &[intimacy_core::graph::MentionEvent]) -> Result<(), CliError> {
    write_atomic(path, |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["from", "to", "timestamp"])?;
        for e in events {
            wr.write_record([e.from.as_str(), e.to.as_str(), e.timestamp.as_deref().unwrap_or("")])?;
        }
        wr.flush()?;
        Ok(())
    })
}
