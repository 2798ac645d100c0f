//! Focal-categorical regression with one intercept per group, fitted by the
//! within (group-demeaned) transformation.
//!
//! Groups are given as a nesting path, outer to inner (`[author, book]`).
//! Dummies for `author` and `author:book` span the same space as dummies for
//! the finest cell alone, so the fit demeans within the full path.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalysisError;
use crate::linalg::{Cholesky, Dense};
use crate::scalar::Scalar;
use crate::stats::{derive_seed, mean, quantile_sorted, rng, sample_sd, Estimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub y: T,
    /// Level of the focal categorical.
    pub level: String,
    /// Nested group ids, outer to inner. Empty means a single group.
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient<T> {
    pub term: String,
    pub beta: T,
    pub se: T,
    pub p_value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult<T> {
    pub reference: String,
    /// Non-reference levels, sorted.
    pub terms: Vec<Coefficient<T>>,
    /// Reference-level mean. With several groups it is the average of the
    /// group intercepts (first per outermost group, then across them), with
    /// SE sd/√A over the A outermost groups; with one group it is the
    /// ordinary OLS intercept.
    pub intercept: Coefficient<T>,
    pub n_observations: usize,
    pub n_groups: usize,
    pub residual_df: usize,
    /// Residual standard deviation.
    pub sigma: T,
    /// Sample SD of the estimated group intercepts (0 with one group).
    pub group_intercept_sd: T,
}

impl<T: Scalar> RegressionResult<T> {
    pub fn coefficient(&self, term: &str) -> Option<&Coefficient<T>> {
        self.terms.iter().find(|c| c.term == term)
    }

    /// Effect of `level` relative to the reference (0 for the reference itself).
    pub fn effect(&self, level: &str) -> Option<T> {
        if level == self.reference {
            Some(T::zero())
        } else {
            self.coefficient(level).map(|c| c.beta)
        }
    }
}

/// "***" p<0.01, "**" p<0.05, "*" p<0.1.
pub fn p_stars<T: Scalar>(p: T) -> &'static str {
    let p = p.as_f64();
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

fn two_sided_p(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df > 0");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

pub fn group_intercept_regression<T: Scalar>(
    observations: &[Observation<T>],
    reference: &str,
) -> Result<RegressionResult<T>, AnalysisError> {
    let levels: BTreeSet<&str> = observations.iter().map(|o| o.level.as_str()).collect();
    if !levels.contains(reference) {
        return Err(AnalysisError::MissingReference(reference.to_string()));
    }
    if levels.len() < 2 {
        return Err(AnalysisError::TooFewLevels(levels.len()));
    }
    let terms: Vec<&str> = levels.iter().copied().filter(|l| *l != reference).collect();
    let term_index: HashMap<&str, usize> = terms.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let k = terms.len();
    let n = observations.len();

    let mut group_of = Vec::with_capacity(n);
    let mut group_ids: HashMap<&[String], usize> = HashMap::new();
    for o in observations {
        let next = group_ids.len();
        group_of.push(*group_ids.entry(o.groups.as_slice()).or_insert(next));
    }
    let g = group_ids.len();
    if n <= g + k {
        return Err(AnalysisError::InsufficientData(format!(
            "{n} observations for {g} groups and {k} terms"
        )));
    }

    let dummy = |o: &Observation<T>| term_index.get(o.level.as_str()).copied();
    // Group means of y and of each dummy column.
    let mut counts = vec![0usize; g];
    let mut ybar = vec![T::zero(); g];
    let mut xbar = vec![vec![T::zero(); k]; g];
    for (o, &gi) in observations.iter().zip(&group_of) {
        counts[gi] += 1;
        ybar[gi] += o.y;
        if let Some(j) = dummy(o) {
            xbar[gi][j] += T::one();
        }
    }
    for gi in 0..g {
        let c = T::of_usize(counts[gi]);
        ybar[gi] /= c;
        xbar[gi].iter_mut().for_each(|x| *x /= c);
    }

    let mut xtx = Dense::zeros(k, k);
    let mut xty = vec![T::zero(); k];
    let mut row = vec![T::zero(); k];
    for (o, &gi) in observations.iter().zip(&group_of) {
        for (j, r) in row.iter_mut().enumerate() {
            *r = -xbar[gi][j];
        }
        if let Some(j) = dummy(o) {
            row[j] += T::one();
        }
        let yt = o.y - ybar[gi];
        for a in 0..k {
            xty[a] += row[a] * yt;
            for b in 0..=a {
                xtx[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            xtx[(b, a)] = xtx[(a, b)];
        }
    }
    let chol =
        Cholesky::new(&xtx, T::of(1e-10)).map_err(|s| AnalysisError::RankDeficient(terms[s.pivot].to_string()))?;
    let beta = chol.solve(&xty);

    let intercepts: Vec<T> = (0..g)
        .map(|gi| ybar[gi] - xbar[gi].iter().zip(&beta).map(|(&x, &b)| x * b).sum::<T>())
        .collect();
    let mut sse = T::zero();
    for (o, &gi) in observations.iter().zip(&group_of) {
        let fit = intercepts[gi] + dummy(o).map_or(T::zero(), |j| beta[j]);
        sse += (o.y - fit) * (o.y - fit);
    }
    let df = n - g - k;
    let s2 = sse / T::of_usize(df);
    let inv = chol.inverse();

    let coef = |term: &str, b: T, se: T| Coefficient {
        term: term.to_string(),
        beta: b,
        se,
        p_value: T::of(two_sided_p((b / se).as_f64(), df)),
    };
    let terms_out: Vec<Coefficient<T>> = terms
        .iter()
        .enumerate()
        .map(|(j, t)| coef(t, beta[j], (s2 * inv[(j, j)]).sqrt()))
        .collect();

    let group_sd = if g >= 2 { sample_sd(&intercepts) } else { T::zero() };
    let quad = |m: &[T]| {
        let mut q = T::zero();
        for a in 0..k {
            for b in 0..k {
                q += m[a] * inv[(a, b)] * m[b];
            }
        }
        q
    };
    // Inner groups share their outer group's effect, so the intercept is
    // averaged (and its spread taken) over outermost groups. Every group
    // intercept also carries the same slope error, added as m̄ᵀ Cov(β̂) m̄.
    let mut by_outer: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
    let mut paths: Vec<(usize, &[String])> = group_ids.iter().map(|(p, &gi)| (gi, *p)).collect();
    paths.sort_unstable_by_key(|&(gi, _)| gi);
    for (gi, path) in paths {
        by_outer.entry(path.first().map(String::as_str)).or_default().push(gi);
    }
    let intercept = if g >= 2 {
        let (units, weights): (Vec<Vec<usize>>, Vec<T>) = if by_outer.len() >= 2 {
            by_outer
                .into_values()
                .map(|v| {
                    let w = T::one() / T::of_usize(v.len());
                    (v, w)
                })
                .unzip()
        } else {
            ((0..g).map(|gi| vec![gi]).collect(), vec![T::one(); g])
        };
        let outer: Vec<T> = units
            .iter()
            .zip(&weights)
            .map(|(v, &w)| v.iter().map(|&gi| intercepts[gi]).sum::<T>() * w)
            .collect();
        let a_n = T::of_usize(outer.len());
        let mut m = vec![T::zero(); k];
        for (v, &w) in units.iter().zip(&weights) {
            for &gi in v {
                for j in 0..k {
                    m[j] += xbar[gi][j] * w / a_n;
                }
            }
        }
        let var = sample_sd(&outer).powi(2) / a_n + s2 * quad(&m);
        coef("intercept", mean(&outer), var.sqrt())
    } else {
        // Classical OLS intercept: Var = s²(1/n + x̄ᵀ(X̃ᵀX̃)⁻¹x̄).
        coef(
            "intercept",
            intercepts[0],
            (s2 * (T::one() / T::of_usize(n) + quad(&xbar[0]))).sqrt(),
        )
    };

    Ok(RegressionResult {
        reference: reference.to_string(),
        terms: terms_out,
        intercept,
        n_observations: n,
        n_groups: g,
        residual_df: df,
        sigma: s2.sqrt(),
        group_intercept_sd: group_sd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect<T> {
    pub level: String,
    pub ame: Estimate<T>,
    /// Resamples in which the level was estimable.
    pub resamples: usize,
}

/// Average marginal effect of every level against the reference. In the
/// dummy-coded linear model this is the coefficient itself; CIs come from
/// refitting on observation-level bootstrap resamples (resamples that cannot
/// be fitted are skipped).
pub fn marginal_effects<T: Scalar>(
    observations: &[Observation<T>],
    result: &RegressionResult<T>,
    bootstrap_n: usize,
    seed: u64,
) -> Result<Vec<MarginalEffect<T>>, AnalysisError> {
    let levels: Vec<String> = std::iter::once(result.reference.clone())
        .chain(result.terms.iter().map(|c| c.term.clone()))
        .collect();
    let draws: Vec<Option<BTreeMap<String, T>>> = (0..bootstrap_n)
        .into_par_iter()
        .map(|b| {
            let mut r = rng(derive_seed(seed, b as u64));
            let sample: Vec<Observation<T>> = (0..observations.len())
                .map(|_| observations[r.random_range(0..observations.len())].clone())
                .collect();
            group_intercept_regression(&sample, &result.reference)
                .ok()
                .map(|fit| fit.terms.into_iter().map(|c| (c.term, c.beta)).collect())
        })
        .collect();
    let mut out = Vec::with_capacity(levels.len());
    for level in levels {
        let value = result.effect(&level).expect("level from result");
        if level == result.reference {
            out.push(MarginalEffect {
                level,
                ame: Estimate {
                    value,
                    ci_low: T::zero(),
                    ci_high: T::zero(),
                },
                resamples: bootstrap_n,
            });
            continue;
        }
        let mut xs: Vec<T> = draws.iter().flatten().filter_map(|m| m.get(&level).copied()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let (ci_low, ci_high) = if xs.is_empty() {
            (T::nan(), T::nan())
        } else {
            (quantile_sorted(&xs, 0.025), quantile_sorted(&xs, 0.975))
        };
        out.push(MarginalEffect {
            level,
            ame: Estimate { value, ci_low, ci_high },
            resamples: xs.len(),
        });
    }
    Ok(out)
}

/// CSV `term,beta,se,p_stars`: focal terms first, then the intercept.
pub fn write_regression<T: Scalar, W: Write>(w: W, result: &RegressionResult<T>) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["term", "beta", "se", "p_stars"])?;
    for c in result.terms.iter().chain(std::iter::once(&result.intercept)) {
        wr.write_record([
            c.term.clone(),
            c.beta.to_string(),
            c.se.to_string(),
            p_stars(c.p_value).to_string(),
        ])?;
    }
    wr.flush()
}

/// CSV `level,ame,ci_low,ci_high`.
pub fn write_marginal_effects<T: Scalar, W: Write>(w: W, effects: &[MarginalEffect<T>]) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["level", "ame", "ci_low", "ci_high"])?;
    for e in effects {
        wr.write_record([
            e.level.clone(),
            e.ame.value.to_string(),
            e.ame.ci_low.to_string(),
            e.ame.ci_high.to_string(),
        ])?;
    }
    wr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(y: f64, level: &str, groups: &[&str]) -> Observation<f64> {
        Observation {
            y,
            level: level.into(),
            groups: groups.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn single_group_is_ols() {
        // y = 1 + 2·[B]: A → {1, 1.5, 0.5}, B → {3, 3.5, 2.5, 3}.
        let data = vec![
            obs(1.0, "A", &[]),
            obs(1.5, "A", &[]),
            obs(0.5, "A", &[]),
            obs(3.0, "B", &[]),
            obs(3.5, "B", &[]),
            obs(2.5, "B", &[]),
            obs(3.0, "B", &[]),
        ];
        let r = group_intercept_regression(&data, "A").unwrap();
        let b = r.coefficient("B").unwrap();
        assert!((b.beta - 2.0).abs() < 1e-12);
        assert!((r.intercept.beta - 1.0).abs() < 1e-12);
        // SSE = 0.5 + 0.5 = 1, df = 5; se(β) = √(s²(1/3 + 1/4)).
        let s2 = 1.0 / 5.0;
        assert!((b.se - (s2 * (1.0 / 3.0 + 0.25f64)).sqrt()).abs() < 1e-12);
        assert!((r.intercept.se - (s2 / 3.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(r.residual_df, 5);
    }

    #[test]
    fn group_shift_invariance() {
        let mut data = Vec::new();
        for g in 0..5 {
            for i in 0..12 {
                let lvl = ["A", "B", "C"][i % 3];
                let y = (g * 7 + i * 3) as f64 % 5.0 + if lvl == "C" { 1.0 } else { 0.0 };
                data.push(obs(y, lvl, &[&g.to_string()]));
            }
        }
        let a = group_intercept_regression(&data, "A").unwrap();
        for o in data.iter_mut().filter(|o| o.groups[0] == "2") {
            o.y += 10.0;
        }
        let b = group_intercept_regression(&data, "A").unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert!((x.beta - y.beta).abs() < 1e-10);
            assert!((x.se - y.se).abs() < 1e-10);
        }
    }

    #[test]
    fn errors() {
        let d = vec![obs(1.0, "A", &[]), obs(2.0, "A", &[])];
        assert!(matches!(
            group_intercept_regression(&d, "B"),
            Err(AnalysisError::MissingReference(_))
        ));
        assert!(matches!(
            group_intercept_regression(&d, "A"),
            Err(AnalysisError::TooFewLevels(1))
        ));
        // Level B only appears alone in its own group: no within variation.
        let d = vec![
            obs(1.0, "A", &["g1"]),
            obs(2.0, "A", &["g1"]),
            obs(3.0, "B", &["g2"]),
            obs(4.0, "B", &["g2"]),
            obs(1.0, "C", &["g1"]),
        ];
        match group_intercept_regression(&d, "A") {
            Err(AnalysisError::RankDeficient(t)) => assert_eq!(t, "B"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn marginal_effects_equal_coefficients() {
        let mut data = Vec::new();
        for i in 0..200 {
            let lvl = ["FF", "MM"][i % 2];
            let y = if lvl == "MM" { -0.5 } else { 0.0 } + ((i * 37) % 11) as f64 / 10.0;
            data.push(obs(y, lvl, &[&(i % 7).to_string()]));
        }
        let r = group_intercept_regression(&data, "FF").unwrap();
        let me = marginal_effects(&data, &r, 200, 3).unwrap();
        assert_eq!(me[0].level, "FF");
        assert_eq!(me[0].ame.value, 0.0);
        assert_eq!(me[1].ame.value, r.coefficient("MM").unwrap().beta);
        assert!(me[1].ame.ci_low < me[1].ame.value && me[1].ame.value < me[1].ame.ci_high);
        assert_eq!(me, marginal_effects(&data, &r, 200, 3).unwrap());
    }

    #[test]
    fn stars() {
        assert_eq!(p_stars(0.005), "***");
        assert_eq!(p_stars(0.03), "**");
        assert_eq!(p_stars(0.07), "*");
        assert_eq!(p_stars(0.5), "");
    }
}
