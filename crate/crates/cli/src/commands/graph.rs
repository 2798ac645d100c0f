//! Mutual-mention graph construction and degree-of-separation analyses.

use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use intimacy_core::graph::{
    self, build_mutual_graph, degree_of_separation, intimacy_by_distance, Distance, DistanceFilter, DistanceQuestion,
    MutualGraph,
};

use crate::rows::{AddressedQuestion, UserPair};
use crate::util::{echo_config, open, read_csv, write_atomic, write_csv};
use crate::CliError;

/// Builds the graph of users who mentioned each other in both directions.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV from,to[,timestamp] (header optional). Output: binary \
graph file (magic MUTGRAPH, version 1).")]
pub struct BuildArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn build(a: BuildArgs) -> Result<(), CliError> {
    let events = graph::read_mention_events(open(&a.events)?)?;
    let g = build_mutual_graph(&events);
    write_atomic(&a.output, |w| Ok(graph::write_graph(w, &g)?))?;
    eprintln!("{} nodes, {} mutual edges", g.n_nodes(), g.n_edges());
    echo_config(&a.output, "graph-build", &a)
}

fn load_graph(path: &Path) -> Result<MutualGraph, CliError> {
    Ok(graph::read_graph(open(path)?)?)
}

/// Degree of separation for user pairs.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV source,target. Output: CSV source,target,degree where \
degree is 0 for a direct mutual edge and 'unreachable' beyond --max-depth.")]
pub struct DistanceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = graph::DEFAULT_MAX_DEPTH)]
    pub max_depth: u32,
}

#[derive(Debug, Serialize)]
struct DistanceRow {
    source: String,
    target: String,
    degree: String,
}

pub fn distance(a: DistanceArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let pairs: Vec<UserPair> = read_csv(&a.pairs)?;
    let rows: Vec<DistanceRow> = pairs
        .into_par_iter()
        .map(|p| {
            let d = degree_of_separation(&g, &p.source, &p.target, a.max_depth)?;
            Ok(DistanceRow {
                source: p.source,
                target: p.target,
                degree: d.to_string(),
            })
        })
        .collect::<Result<_, graph::GraphError>>()?;
    write_csv(&a.output, &rows)?;
    echo_config(&a.output, "graph-distance", &a)
}

/// Mean z-intimacy of questions by the asker–recipient degree of separation.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV question_id,asker,recipient,score,recipient_followers,\
recipient_verified; scores are z-standardized over the kept questions. Output: CSV \
degree,mean,ci_low,ci_high,n with the unreachable bin last.")]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Drop recipients with at least this many followers.
    #[arg(long, default_value_t = graph::DEFAULT_MAX_FOLLOWERS)]
    pub max_followers: u64,
    #[arg(long)]
    pub keep_verified: bool,
    #[arg(long, default_value_t = graph::DEFAULT_MAX_DEPTH)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let rows: Vec<AddressedQuestion> = read_csv(&a.questions)?;
    let filter = DistanceFilter {
        max_followers: a.max_followers,
        drop_verified: !a.keep_verified,
        max_depth: a.max_depth,
    };
    let questions: Vec<DistanceQuestion<f64>> = rows
        .into_iter()
        .map(|r| DistanceQuestion {
            asker: r.asker,
            recipient: r.recipient,
            z: r.score,
            recipient_followers: r.recipient_followers,
            recipient_verified: r.recipient_verified,
        })
        .filter(|q| filter.keeps(q))
        .collect();
    let z = standardize(&questions.iter().map(|q| q.z).collect::<Vec<_>>())?;
    let questions: Vec<_> = questions
        .into_iter()
        .zip(z)
        .map(|(q, z)| DistanceQuestion { z, ..q })
        .collect();
    let bins = intimacy_by_distance(&questions, &g, &filter, a.bootstrap, a.seed);
    if !bins.iter().any(|b| b.distance != Distance::Unreachable) {
        log::warn!("no question pair is connected in the graph");
    }
    write_atomic(&a.output, |w| Ok(graph::write_distance_bins(w, &bins)?))?;
    echo_config(&a.output, "analyze-distance", &a)
}

fn standardize(xs: &[f64]) -> Result<Vec<f64>, CliError> {
    let keyed: Vec<(&str, f64)> = xs.iter().map(|&x| ("all", x)).collect();
    Ok(intimacy_core::analysis::zstandardize_within_domain(&keyed)?)
}
