mod analyze;
mod annotate;
mod graph;
mod model;
mod synth;

use clap::Subcommand;

use crate::CliError;

#[derive(Debug, Subcommand)]
pub enum Command {
    Extract(annotate::ExtractArgs),
    Tuples(annotate::TuplesArgs),
    Serve(annotate::ServeArgs),
    Score(annotate::ScoreArgs),
    Reliability(annotate::ReliabilityArgs),
    PlanPairs(annotate::PlanPairsArgs),
    ValidatePairs(annotate::ValidatePairsArgs),
    Train(model::TrainArgs),
    Predict(model::PredictArgs),
    Evaluate(model::EvaluateArgs),
    TopicSweep(model::SweepArgs),
    AnalyzeMarkers(analyze::MarkersArgs),
    AnalyzeDyads(analyze::DyadsArgs),
    AnalyzeAnonymity(analyze::AnonymityArgs),
    GraphBuild(graph::BuildArgs),
    GraphDistance(graph::DistanceArgs),
    AnalyzeDistance(graph::AnalyzeArgs),
    Synth(synth::SynthArgs),
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(a) => annotate::extract(a),
        Command::Tuples(a) => annotate::tuples(a),
        Command::Serve(a) => annotate::serve(a),
        Command::Score(a) => annotate::score(a),
        Command::Reliability(a) => annotate::reliability(a),
        Command::PlanPairs(a) => annotate::plan_pairs(a),
        Command::ValidatePairs(a) => annotate::validate_pairs(a),
        Command::Train(a) => model::train(a),
        Command::Predict(a) => model::predict(a),
        Command::Evaluate(a) => model::evaluate(a),
        Command::TopicSweep(a) => model::sweep(a),
        Command::AnalyzeMarkers(a) => analyze::markers(a),
        Command::AnalyzeDyads(a) => analyze::dyads(a),
        Command::AnalyzeAnonymity(a) => analyze::anonymity(a),
        Command::GraphBuild(a) => graph::build(a),
        Command::GraphDistance(a) => graph::distance(a),
        Command::AnalyzeDistance(a) => graph::analyze(a),
        Command::Synth(a) => synth::run(a),
    }
}
