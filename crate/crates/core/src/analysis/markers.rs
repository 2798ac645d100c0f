use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use crate::scalar::Scalar;
use crate::stats::{bootstrap_ci, derive_seed, mean, quantile_sorted, rng, Estimate};

/// A question with its domain and within-domain z-scored intimacy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredText<T> {
    pub domain: String,
    pub text: String,
    pub z: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainContrast<T> {
    pub domain: String,
    pub n_with: usize,
    pub n_without: usize,
    pub with: Estimate<T>,
    pub without: Estimate<T>,
    /// `with − without`, CI from resampling both groups independently.
    pub delta: Estimate<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerContrast<T> {
    pub lexicon: String,
    pub domains: Vec<DomainContrast<T>>,
    /// Domains dropped because one marker group was empty.
    pub omitted: Vec<String>,
}

/// Per-domain mean z-intimacy of questions with and without a lexicon match.
pub fn marker_contrast<T: Scalar>(
    questions: &[ScoredText<T>],
    lexicon: &Lexicon,
    bootstrap_n: usize,
    seed: u64,
) -> MarkerContrast<T> {
    let tagged: Vec<bool> = questions.par_iter().map(|q| lexicon.matches(&q.text)).collect();
    let mut groups: BTreeMap<&str, (Vec<T>, Vec<T>)> = BTreeMap::new();
    for (q, &t) in questions.iter().zip(&tagged) {
        let g = groups.entry(q.domain.as_str()).or_default();
        if t {
            g.0.push(q.z)
        } else {
            g.1.push(q.z)
        }
    }
    let mut out = MarkerContrast {
        lexicon: lexicon.name().to_string(),
        domains: Vec::new(),
        omitted: Vec::new(),
    };
    for (d, (with, without)) in groups.into_iter() {
        if with.is_empty() || without.is_empty() {
            log::warn!(
                "domain {d}: empty marker group ({} with, {} without); omitted",
                with.len(),
                without.len()
            );
            out.omitted.push(d.to_string());
            continue;
        }
        let ds = derive_seed(seed, fnv(d));
        out.domains.push(DomainContrast {
            domain: d.to_string(),
            n_with: with.len(),
            n_without: without.len(),
            with: bootstrap_ci(&with, bootstrap_n, derive_seed(ds, 1), |s| mean(s)),
            without: bootstrap_ci(&without, bootstrap_n, derive_seed(ds, 2), |s| mean(s)),
            delta: delta_ci(&with, &without, bootstrap_n, derive_seed(ds, 3)),
        });
    }
    out
}

fn delta_ci<T: Scalar>(a: &[T], b: &[T], resamples: usize, seed: u64) -> Estimate<T> {
    let value = mean(a) - mean(b);
    if resamples == 0 {
        return Estimate {
            value,
            ci_low: value,
            ci_high: value,
        };
    }
    let resample_mean = |xs: &[T], r: &mut crate::stats::SeededRng| {
        (0..xs.len()).map(|_| xs[r.random_range(0..xs.len())]).sum::<T>() / T::of_usize(xs.len())
    };
    let mut draws: Vec<T> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(derive_seed(seed, i as u64));
            resample_mean(a, &mut r) - resample_mean(b, &mut r)
        })
        .collect();
    draws.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    Estimate {
        value,
        ci_low: quantile_sorted(&draws, 0.025),
        ci_high: quantile_sorted(&draws, 0.975),
    }
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// CSV: `lexicon,domain,n_with,mean_with,ci_low_with,ci_high_with,n_without,...,delta,delta_ci_low,delta_ci_high`.
pub fn write_marker_contrast<T: Scalar, W: Write>(w: W, contrasts: &[MarkerContrast<T>]) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "lexicon",
        "domain",
        "n_with",
        "mean_with",
        "ci_low_with",
        "ci_high_with",
        "n_without",
        "mean_without",
        "ci_low_without",
        "ci_high_without",
        "delta",
        "delta_ci_low",
        "delta_ci_high",
    ])?;
    for c in contrasts {
        for d in &c.domains {
            let e = |x: &Estimate<T>| [x.value.to_string(), x.ci_low.to_string(), x.ci_high.to_string()];
            let mut row = vec![c.lexicon.clone(), d.domain.clone(), d.n_with.to_string()];
            row.extend(e(&d.with));
            row.push(d.n_without.to_string());
            row.extend(e(&d.without));
            row.extend(e(&d.delta));
            wr.write_record(&row)?;
        }
    }
    wr.flush()
}
