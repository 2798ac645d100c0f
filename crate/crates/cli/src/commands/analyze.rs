//! Linguistic-marker contrasts and the dyad / anonymity regressions.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use intimacy_core::analysis::{
    self, classify_identity, extract_addressee, infer_gender, marginal_effects, marker_contrast,
    write_marginal_effects, write_marker_contrast, write_regression, DyadLabel, Gender, IdentityCategory,
    IdentityLexicons, Lexicon, NameDatabase, NameKind, NameListClassifier, Observation, ScoredText,
};

use crate::rows::{DomainQuestion, DyadQuestion, UserQuestion};
use crate::util::{echo_config, read_csv, write_atomic, write_csv};
use crate::CliError;

/// Mean intimacy with vs. without each marker lexicon, per domain.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV question_id,domain,text,score; scores are z-standardized \
within each domain first. Output: CSV lexicon,domain,n_with,mean_with,ci_low_with,ci_high_with,\
n_without,mean_without,ci_low_without,ci_high_without,delta,delta_ci_low,delta_ci_high \
with 95% percentile-bootstrap intervals.")]
pub struct MarkersArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Lexicon file, one entry per line (repeatable; named after the file
    /// stem). Defaults to the built-in hedge and swear lists.
    #[arg(long)]
    pub lexicon: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn markers(a: MarkersArgs) -> Result<(), CliError> {
    let rows: Vec<DomainQuestion> = read_csv(&a.data)?;
    let keyed: Vec<(String, f64)> = rows.iter().map(|r| (r.domain.clone(), r.score)).collect();
    let z = analysis::zstandardize_within_domain(&keyed)?;
    let scored: Vec<ScoredText<f64>> = rows
        .into_iter()
        .zip(z)
        .map(|(r, z)| ScoredText {
            domain: r.domain,
            text: r.text,
            z,
        })
        .collect();
    let lexicons = if a.lexicon.is_empty() {
        vec![Lexicon::hedges(), Lexicon::swears()]
    } else {
        a.lexicon
            .iter()
            .map(|p| {
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Lexicon::load(&name, p)
            })
            .collect::<Result<_, _>>()?
    };
    let contrasts: Vec<_> = lexicons
        .iter()
        .enumerate()
        .map(|(i, lex)| marker_contrast(&scored, lex, a.bootstrap, a.seed.wrapping_add(i as u64)))
        .collect();
    for c in &contrasts {
        for d in &c.omitted {
            log::warn!("{}: domain {d} omitted (a marker group is empty)", c.lexicon);
        }
    }
    write_atomic(&a.output, |w| Ok(write_marker_contrast(w, &contrasts)?))?;
    echo_config(&a.output, "analyze-markers", &a)
}

#[derive(Debug, Args, Serialize)]
pub struct RegressionOutputs {
    /// Coefficient table: CSV term,beta,se,p_stars (intercept last).
    #[arg(long)]
    pub output: PathBuf,
    /// Average marginal effects: CSV level,ame,ci_low,ci_high.
    #[arg(long)]
    pub effects: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn regress(obs: &[Observation<f64>], reference: &str, out: &RegressionOutputs) -> Result<(), CliError> {
    let fit = analysis::group_intercept_regression(obs, reference)?;
    write_atomic(&out.output, |w| Ok(write_regression(w, &fit)?))?;
    if let Some(path) = &out.effects {
        let effects = marginal_effects(obs, &fit, out.bootstrap, out.seed)?;
        write_atomic(path, |w| Ok(write_marginal_effects(w, &effects)?))?;
    }
    eprintln!("{} observations in {} groups", fit.n_observations, fit.n_groups);
    Ok(())
}

fn names(path: &Option<PathBuf>) -> Result<NameDatabase, CliError> {
    Ok(match path {
        Some(p) => NameDatabase::load(p)?,
        None => NameDatabase::builtin(),
    })
}

/// Speaker/addressee gender dyads regressed on intimacy with nested
/// group intercepts.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV question_id,score,text,speaker,addressee,kind,groups\
[,speaker_gender,addressee_gender]; kind is character or username, groups a \
'/'-separated nesting path. Empty genders are inferred; an empty addressee is taken \
from a trailing vocative. Rows whose dyad cannot be resolved are dropped. The \
reference level is FF.")]
pub struct DyadsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub out: RegressionOutputs,
    /// Name CSV name,gender,count (defaults to the built-in list).
    #[arg(long)]
    pub names: Option<PathBuf>,
}

fn resolve_gender(
    given: &str,
    name: &str,
    kind: NameKind,
    db: &NameDatabase,
    classifier: &NameListClassifier,
) -> Result<Option<Gender>, CliError> {
    if !given.trim().is_empty() {
        return given.parse().map(Some).map_err(CliError::Data);
    }
    Ok(infer_gender(name, kind, db, classifier))
}

pub fn dyads(a: DyadsArgs) -> Result<(), CliError> {
    let rows: Vec<DyadQuestion> = read_csv(&a.data)?;
    let db = names(&a.names)?;
    let classifier = NameListClassifier::new(db.clone());
    let mut obs = Vec::new();
    for r in &rows {
        let kind = match r.kind.as_str() {
            "character" => NameKind::Character,
            "username" => NameKind::Username,
            k => return Err(CliError::Data(format!("{}: unknown kind {k:?}", r.question_id))),
        };
        let addressee = if r.addressee.trim().is_empty() {
            extract_addressee(&r.text).unwrap_or_default()
        } else {
            r.addressee.clone()
        };
        let s = resolve_gender(&r.speaker_gender, &r.speaker, kind, &db, &classifier)?;
        let t = resolve_gender(&r.addressee_gender, &addressee, kind, &db, &classifier)?;
        if let (Some(s), Some(t)) = (s, t) {
            obs.push(Observation {
                y: r.score,
                level: DyadLabel::from_genders(s, t).as_str().to_string(),
                groups: r
                    .groups
                    .split('/')
                    .filter(|g| !g.is_empty())
                    .map(String::from)
                    .collect(),
            });
        }
    }
    if obs.len() < rows.len() {
        eprintln!(
            "{} of {} rows dropped: unresolved gender",
            rows.len() - obs.len(),
            rows.len()
        );
    }
    regress(&obs, DyadLabel::REFERENCE.as_str(), &a.out)?;
    echo_config(&a.out.output, "analyze-dyads", &a)
}

/// Username identity categories regressed on intimacy with subreddit intercepts.
#[derive(Debug, Args, Serialize)]
#[command(after_help = "Input: CSV question_id,score,username,subreddit. Categories are \
Anonymous, NameContaining, Depersonalized and Other (the reference).")]
pub struct AnonymityArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub out: RegressionOutputs,
    /// Per-question categories: CSV question_id,username,category.
    #[arg(long)]
    pub categories: Option<PathBuf>,
    #[arg(long)]
    pub names: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CategoryRow<'a> {
    question_id: &'a str,
    username: &'a str,
    category: &'static str,
}

pub fn anonymity(a: AnonymityArgs) -> Result<(), CliError> {
    let rows: Vec<UserQuestion> = read_csv(&a.data)?;
    let db = names(&a.names)?;
    let lexicons = IdentityLexicons::default();
    let classifier = NameListClassifier::new(db.clone());
    let cats: Vec<IdentityCategory> = rows
        .iter()
        .map(|r| classify_identity(&r.username, &db, &lexicons, &classifier))
        .collect();
    let obs: Vec<Observation<f64>> = rows
        .iter()
        .zip(&cats)
        .map(|(r, c)| Observation {
            y: r.score,
            level: c.as_str().to_string(),
            groups: vec![r.subreddit.clone()],
        })
        .collect();
    regress(&obs, IdentityCategory::Other.as_str(), &a.out)?;
    if let Some(path) = &a.categories {
        write_categories(path, &rows, &cats)?;
    }
    echo_config(&a.out.output, "analyze-anonymity", &a)
}

fn write_categories(path: &Path, rows: &[UserQuestion], cats: &[IdentityCategory]) -> Result<(), CliError> {
    let out: Vec<CategoryRow> = rows
        .iter()
        .zip(cats)
        .map(|(r, c)| CategoryRow {
            question_id: &r.question_id,
            username: &r.username,
            category: c.as_str(),
        })
        .collect();
    write_csv(path, &out)
}
