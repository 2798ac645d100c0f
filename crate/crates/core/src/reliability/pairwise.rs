//! Human validation of model score gaps on question pairs.
//!
//! Pairs are oriented so that `question_a` is the one the model scores
//! higher; `model_gap = score_a - score_b >= 0`. A human label agrees with
//! the model when it is [`HumanLabel::AMore`].

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{krippendorff_alpha, ReliabilityError};
use crate::scalar::Scalar;
use crate::stats::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanLabel {
    AMore,
    BMore,
    Same,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJudgment<T> {
    pub pair_id: String,
    #[serde(rename = "qa_id")]
    pub question_a: String,
    #[serde(rename = "qb_id")]
    pub question_b: String,
    pub model_gap: T,
    pub annotator_id: String,
    #[serde(rename = "label")]
    pub human_label: HumanLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport<T> {
    pub bin_low: T,
    pub bin_high: T,
    pub n_pairs: usize,
    /// None when no pair in the bin has two annotations.
    pub alpha: Option<T>,
    pub agreement: T,
}

fn bin_of<T: Scalar>(gap: T, width: T) -> usize {
    // guard against 0.3 / 0.1 = 2.9999...
    (gap / width + T::of(1e-9)).floor().to_usize().unwrap_or(0)
}

/// Most frequent label; `None` on a tie for first place.
fn majority(labels: &[HumanLabel]) -> Option<HumanLabel> {
    let mut counts: BTreeMap<HumanLabel, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let top = counts.values().copied().max()?;
    let mut winners = counts.into_iter().filter(|&(_, c)| c == top);
    let first = winners.next().map(|(l, _)| l);
    if winners.next().is_some() {
        None
    } else {
        first
    }
}

/// Per-bin α and model agreement, plus overall agreement across all pairs.
/// Empty bins are absent from the output.
pub fn pairwise_validation<T: Scalar>(judgments: &[PairJudgment<T>], bin_width: T) -> (Vec<BinReport<T>>, T) {
    let annotators: Vec<&str> = {
        let mut a: Vec<&str> = judgments.iter().map(|j| j.annotator_id.as_str()).collect();
        a.sort_unstable();
        a.dedup();
        a
    };
    // pair id -> (gap, labels by annotator)
    let mut pairs: BTreeMap<&str, (T, Vec<Option<HumanLabel>>)> = BTreeMap::new();
    for j in judgments {
        let entry = pairs
            .entry(j.pair_id.as_str())
            .or_insert_with(|| (j.model_gap, vec![None; annotators.len()]));
        let col = annotators.binary_search(&j.annotator_id.as_str()).expect("collected");
        entry.1[col] = Some(j.human_label);
    }

    let mut bins: BTreeMap<usize, Vec<&Vec<Option<HumanLabel>>>> = BTreeMap::new();
    for (gap, labels) in pairs.values() {
        bins.entry(bin_of(*gap, bin_width)).or_default().push(labels);
    }
    let agrees = |labels: &Vec<Option<HumanLabel>>| {
        let present: Vec<HumanLabel> = labels.iter().flatten().copied().collect();
        majority(&present) == Some(HumanLabel::AMore)
    };

    let mut total_agree = 0usize;
    let reports = bins
        .into_iter()
        .map(|(b, units)| {
            let agree = units.iter().filter(|u| agrees(u)).count();
            total_agree += agree;
            let table: Vec<Vec<Option<HumanLabel>>> = units.iter().map(|u| (*u).clone()).collect();
            BinReport {
                bin_low: bin_width * T::of_usize(b),
                bin_high: bin_width * T::of_usize(b + 1),
                n_pairs: units.len(),
                alpha: krippendorff_alpha(&table).ok(),
                agreement: T::of_usize(agree) / T::of_usize(units.len()),
            }
        })
        .collect();
    let overall = if pairs.is_empty() {
        T::zero()
    } else {
        T::of_usize(total_agree) / T::of_usize(pairs.len())
    };
    (reports, overall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPair<T> {
    pub pair_id: String,
    pub qa_id: String,
    pub qb_id: String,
    pub model_gap: T,
}

/// Samples `per_bin` distinct question pairs for each of `n_bins` gap bins.
pub fn plan_validation_pairs<T: Scalar>(
    scores: &[(String, T)],
    bin_width: T,
    n_bins: usize,
    per_bin: usize,
    seed: u64,
) -> Result<Vec<PlannedPair<T>>, ReliabilityError> {
    if scores.len() < 2 {
        return Err(ReliabilityError::InsufficientData(
            "need at least 2 scored questions".into(),
        ));
    }
    let mut r = rng(seed);
    let mut filled: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_bins];
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let budget = 2_000 * n_bins * per_bin.max(1);
    for _ in 0..budget {
        if filled.iter().all(|b| b.len() >= per_bin) {
            break;
        }
        let i = r.random_range(0..scores.len());
        let j = r.random_range(0..scores.len());
        if i == j {
            continue;
        }
        let (hi, lo) = if scores[i].1 >= scores[j].1 { (i, j) } else { (j, i) };
        let b = bin_of(scores[hi].1 - scores[lo].1, bin_width);
        if b < n_bins && filled[b].len() < per_bin && used.insert((hi.min(lo), hi.max(lo))) {
            filled[b].push((hi, lo));
        }
    }
    let short: Vec<usize> = (0..n_bins).filter(|&b| filled[b].len() < per_bin).collect();
    if !short.is_empty() {
        return Err(ReliabilityError::InsufficientData(format!(
            "could not fill gap bins {short:?} with {per_bin} pairs"
        )));
    }
    Ok(filled
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(k, (hi, lo))| PlannedPair {
            pair_id: format!("p{k:04}"),
            qa_id: scores[hi].0.clone(),
            qb_id: scores[lo].0.clone(),
            model_gap: scores[hi].1 - scores[lo].1,
        })
        .collect())
}

/// CSV columns: `pair_id,qa_id,qb_id,model_gap,annotator_id,label`.
pub fn read_pair_judgments<R: Read, T: Scalar>(input: R) -> Result<Vec<PairJudgment<T>>, ReliabilityError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (k, row) in r.deserialize::<PairJudgment<T>>().enumerate() {
        let row = row.map_err(|e| ReliabilityError::Parse {
            line: k + 2,
            message: e.to_string(),
        })?;
        if !(row.model_gap >= T::zero()) {
            return Err(ReliabilityError::Parse {
                line: k + 2,
                message: "model_gap must be non-negative".into(),
            });
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_bins<W: Write, T: Scalar>(out: W, bins: &[BinReport<T>]) -> Result<(), ReliabilityError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ReliabilityError::Io(std::io::Error::other(e));
    w.write_record(["bin_low", "bin_high", "n_pairs", "alpha", "agreement"])
        .map_err(io)?;
    for b in bins {
        w.write_record([
            format!("{:.1}", b.bin_low.as_f64()),
            format!("{:.1}", b.bin_high.as_f64()),
            b.n_pairs.to_string(),
            b.alpha.map(|a| a.to_string()).unwrap_or_default(),
            b.agreement.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pj(pair: &str, gap: f64, who: &str, label: HumanLabel) -> PairJudgment<f64> {
        PairJudgment {
            pair_id: pair.into(),
            question_a: format!("{pair}a"),
            question_b: format!("{pair}b"),
            model_gap: gap,
            annotator_id: who.into(),
            human_label: label,
        }
    }

    #[test]
    fn full_agreement_in_every_bin() {
        let js: Vec<_> = (0..10)
            .flat_map(|b| {
                let gap = b as f64 * 0.1 + 0.05;
                ["x", "y"].map(|w| pj(&format!("p{b}"), gap, w, HumanLabel::AMore))
            })
            .collect();
        let (bins, overall) = pairwise_validation(&js, 0.1);
        assert_eq!(bins.len(), 10);
        assert!(bins.iter().all(|b| b.agreement == 1.0));
        assert_eq!(overall, 1.0);
    }

    #[test]
    fn bin_boundaries_are_half_open() {
        assert_eq!(bin_of(0.3f64, 0.1), 3);
        assert_eq!(bin_of(0.2999f64, 0.1), 2);
        assert_eq!(bin_of(0.0f64, 0.1), 0);
    }

    #[test]
    fn majority_ties_do_not_count() {
        let js = vec![
            pj("p1", 0.5, "x", HumanLabel::AMore),
            pj("p1", 0.5, "y", HumanLabel::Same),
        ];
        let (bins, _) = pairwise_validation(&js, 0.1);
        assert_eq!(bins[0].agreement, 0.0);
    }

    #[test]
    fn plan_fills_ten_bins_of_thirty() {
        let scores: Vec<(String, f64)> = (0..400)
            .map(|i| (format!("q{i}"), -1.0 + 2.0 * i as f64 / 399.0))
            .collect();
        let plan = plan_validation_pairs(&scores, 0.1, 10, 30, 4).unwrap();
        assert_eq!(plan.len(), 300);
        let mut per_bin = [0usize; 10];
        for p in &plan {
            assert!(p.model_gap >= 0.0);
            per_bin[bin_of(p.model_gap, 0.1)] += 1;
        }
        assert!(per_bin.iter().all(|&c| c == 30));
    }

    #[test]
    fn csv_parsing() {
        let csv = "pair_id,qa_id,qb_id,model_gap,annotator_id,label\np1,a,b,0.25,x,a_more\np1,a,b,0.25,y,same\n";
        let js: Vec<PairJudgment<f64>> = read_pair_judgments(csv.as_bytes()).unwrap();
        assert_eq!(js[1].human_label, HumanLabel::Same);
        let bad = "pair_id,qa_id,qb_id,model_gap,annotator_id,label\np1,a,b,-0.25,x,a_more\n";
        assert!(read_pair_judgments::<_, f64>(bad.as_bytes()).is_err());
    }
}
