//! Iterative Luce Spectral Ranking.
//!
//! Each outer iteration builds a continuous-time Markov chain whose rate
//! from loser `j` to winner `i` is `count(i beats j) / (π_i + π_j)`, plus a
//! pseudo-count `α / (π_i + π_j)` between every ordered pair, and replaces
//! `π` with the chain's stationary distribution. The fixed point is the
//! (regularized) Bradley–Terry–Luce maximum-likelihood estimate.

use std::collections::BTreeMap;

use super::{BtlStrengths, BwsError, PairwiseComparison};
use crate::linalg::{solve_lu, Dense};
use crate::scalar::Scalar;

const STATIONARY_TOL: f64 = 1e-9;
const STATIONARY_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlsrParams<T> {
    /// Pseudo-comparisons added for every ordered pair of items.
    pub regularization: T,
    /// Stop once no strength moves by more than this.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for IlsrParams<T> {
    fn default() -> Self {
        Self {
            regularization: T::of(0.01),
            tolerance: T::of(1e-8),
            max_iterations: 1_000,
        }
    }
}

/// Fits strengths to a list of comparisons. Items are every id that appears.
pub fn ilsr<T: Scalar>(
    comparisons: &[PairwiseComparison],
    params: &IlsrParams<T>,
) -> Result<BtlStrengths<T>, BwsError> {
    let mut ids: Vec<&str> = comparisons
        .iter()
        .flat_map(|c| [c.winner.as_str(), c.loser.as_str()])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let index = |id: &str| ids.binary_search(&id).expect("interned");

    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in comparisons {
        *counts.entry((index(&c.winner), index(&c.loser))).or_default() += 1;
    }
    let counts: Vec<(usize, usize, T)> = counts.into_iter().map(|((w, l), k)| (w, l, T::of_usize(k))).collect();
    let pi = ilsr_counts(ids.len(), &counts, params)?;
    Ok(BtlStrengths::new(ids.into_iter().map(String::from).collect(), pi))
}

/// Index-based core: `counts` holds `(winner, loser, weight)` triples over `0..n`.
pub fn ilsr_counts<T: Scalar>(
    n: usize,
    counts: &[(usize, usize, T)],
    params: &IlsrParams<T>,
) -> Result<Vec<T>, BwsError> {
    if n < 2 {
        return Err(BwsError::TooFewComparedItems(n));
    }
    if params.regularization <= T::zero() && !strongly_connected(n, counts) {
        return Err(BwsError::NotConnected);
    }
    let mut pi = vec![T::one() / T::of_usize(n); n];
    for _ in 0..params.max_iterations {
        let rates = rate_matrix(n, counts, &pi, params.regularization);
        let next = stationary(&rates, &pi);
        let delta = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        pi = next;
        if delta < params.tolerance {
            return Ok(pi);
        }
    }
    Err(BwsError::NoConvergence(params.max_iterations))
}

/// `rates[(to, from)]` is the transition rate from `from` to `to`.
fn rate_matrix<T: Scalar>(n: usize, counts: &[(usize, usize, T)], pi: &[T], alpha: T) -> Dense<T> {
    let mut rates = Dense::zeros(n, n);
    if alpha > T::zero() {
        for to in 0..n {
            for from in 0..n {
                if to != from {
                    rates[(to, from)] = alpha / (pi[to] + pi[from]);
                }
            }
        }
    }
    for &(w, l, k) in counts {
        rates[(w, l)] += k / (pi[w] + pi[l]);
    }
    rates
}

/// Stationary distribution by power iteration on the uniformized chain,
/// warm-started at `start`; falls back to a direct solve.
fn stationary<T: Scalar>(rates: &Dense<T>, start: &[T]) -> Vec<T> {
    let n = rates.rows();
    let mut outflow = vec![T::zero(); n];
    for to in 0..n {
        for (from, out) in outflow.iter_mut().enumerate() {
            *out += rates[(to, from)];
        }
    }
    let gamma = outflow.iter().copied().fold(T::zero(), T::max) * T::of(1.0001);
    if !(gamma > T::zero()) {
        return start.to_vec();
    }
    let tol = T::of(STATIONARY_TOL);
    let mut pi = start.to_vec();
    for _ in 0..STATIONARY_MAX_STEPS {
        let inflow = rates.mul_vec(&pi);
        let mut next: Vec<T> = (0..n)
            .map(|i| pi[i] + (inflow[i] - pi[i] * outflow[i]) / gamma)
            .collect();
        let total: T = next.iter().copied().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        pi = next;
        if delta < tol {
            return pi;
        }
    }
    log::debug!("power iteration hit its step cap; solving balance equations directly");
    stationary_direct(rates, &outflow).unwrap_or(pi)
}

fn stationary_direct<T: Scalar>(rates: &Dense<T>, outflow: &[T]) -> Option<Vec<T>> {
    let n = rates.rows();
    let mut a = rates.clone();
    for i in 0..n {
        a[(i, i)] -= outflow[i];
    }
    for j in 0..n {
        a[(n - 1, j)] = T::one();
    }
    let mut b = vec![T::zero(); n];
    b[n - 1] = T::one();
    let mut pi = solve_lu(&a, &b).ok()?;
    pi.iter_mut().for_each(|x| *x = x.max(T::min_positive_value()));
    let total: T = pi.iter().copied().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Some(pi)
}

/// Every item reaches every other along loser→winner edges.
fn strongly_connected<T>(n: usize, counts: &[(usize, usize, T)]) -> bool {
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for &(w, l, _) in counts {
        fwd[l].push(w);
        rev[w].push(l);
    }
    let reach_all = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach_all(&fwd) && reach_all(&rev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(w: &str, l: &str) -> PairwiseComparison {
        PairwiseComparison {
            winner: w.into(),
            loser: l.into(),
        }
    }

    fn repeat(w: &str, l: &str, k: usize) -> Vec<PairwiseComparison> {
        (0..k).map(|_| cmp(w, l)).collect()
    }

    #[test]
    fn symmetric_pair_is_even() {
        let s: BtlStrengths<f64> = ilsr(&[cmp("A", "B"), cmp("B", "A")], &IlsrParams::default()).unwrap();
        assert!((s.get("A").unwrap() - 0.5).abs() < 1e-12);
        assert!((s.get("B").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_item_ratio_matches_closed_form() {
        // BTL MLE with 3 wins vs 1 is π_A/π_B = 3
        let mut c = repeat("A", "B", 3);
        c.extend(repeat("B", "A", 1));
        let p = IlsrParams {
            regularization: 0.0,
            ..Default::default()
        };
        let s: BtlStrengths<f64> = ilsr(&c, &p).unwrap();
        assert!((s.get("A").unwrap() - 0.75).abs() < 1e-7);
    }

    #[test]
    fn unconnected_without_regularization_fails() {
        let p = IlsrParams {
            regularization: 0.0,
            ..Default::default()
        };
        let err = ilsr::<f64>(&[cmp("A", "B"), cmp("B", "C")], &p).unwrap_err();
        assert!(matches!(err, BwsError::NotConnected));
        // regularization restores irreducibility
        assert!(ilsr::<f64>(&[cmp("A", "B"), cmp("B", "C")], &IlsrParams::default()).is_ok());
    }

    #[test]
    fn too_few_items() {
        assert!(matches!(
            ilsr::<f64>(&[], &IlsrParams::default()),
            Err(BwsError::TooFewComparedItems(0))
        ));
    }

    #[test]
    fn iteration_cap_reported() {
        let mut c = repeat("A", "B", 3);
        c.extend(repeat("B", "C", 3));
        c.push(cmp("C", "A"));
        let p = IlsrParams {
            regularization: 0.0,
            tolerance: 1e-30,
            max_iterations: 2,
        };
        assert!(matches!(ilsr::<f64>(&c, &p), Err(BwsError::NoConvergence(2))));
    }

    #[test]
    fn satisfies_btl_stationarity() {
        let mut c = repeat("A", "B", 3);
        c.extend(repeat("B", "A", 1));
        c.extend(repeat("B", "C", 3));
        c.extend(repeat("C", "B", 1));
        c.extend(repeat("A", "C", 4));
        c.extend(repeat("C", "A", 1));
        let p = IlsrParams {
            regularization: 0.0,
            tolerance: 1e-12,
            ..Default::default()
        };
        let s: BtlStrengths<f64> = ilsr(&c, &p).unwrap();
        // gradient of the log-likelihood vanishes at the MLE
        for i in ["A", "B", "C"] {
            let mut grad = 0.0;
            for x in &c {
                let (pw, pl) = (s.get(&x.winner).unwrap(), s.get(&x.loser).unwrap());
                if x.winner == i {
                    grad += 1.0 / pw - 1.0 / (pw + pl);
                } else if x.loser == i {
                    grad -= 1.0 / (pw + pl);
                }
            }
            assert!(grad.abs() < 1e-6, "{i}: {grad}");
        }
    }

    #[test]
    fn direct_solve_agrees_with_power_iteration() {
        let counts = vec![(0usize, 1usize, 3.0f64), (1, 0, 1.0), (1, 2, 2.0), (2, 0, 1.0)];
        let pi = vec![1.0 / 3.0; 3];
        let rates = rate_matrix(3, &counts, &pi, 0.01);
        let mut outflow = vec![0.0; 3];
        for to in 0..3 {
            for from in 0..3 {
                outflow[from] += rates[(to, from)];
            }
        }
        let direct = stationary_direct(&rates, &outflow).unwrap();
        let power = stationary(&rates, &pi);
        for (a, b) in direct.iter().zip(&power) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
