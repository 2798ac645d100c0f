//! L2-regularized least squares with an unpenalized bias.
//!
//! Centering the features and target removes the bias from the penalized
//! problem. With more features than rows the dual system
//! `(Xc Xcᵀ + λI) a = yc`, `w = Xcᵀ a` is solved instead of the primal one;
//! both give the same minimizer for λ > 0.

use serde::{Deserialize, Serialize};

use super::ngram::{sparse_dot, SparseRows};
use super::ModelError;
use crate::linalg::{Cholesky, Dense};
use crate::scalar::Scalar;
use crate::stats::mean;

pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub lambda: T,
}

impl<T: Scalar> RidgeModel<T> {
    pub fn predict(&self, x: &SparseRows<T>) -> Result<Vec<T>, ModelError> {
        if x.n_cols() != self.weights.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "model has {} weights, features have {} columns",
                self.weights.len(),
                x.n_cols()
            )));
        }
        Ok((0..x.n_rows())
            .map(|i| x.dot_row(i, &self.weights) + self.bias)
            .collect())
    }
}

fn column_means<T: Scalar>(x: &SparseRows<T>) -> Vec<T> {
    let mut mu = vec![T::zero(); x.n_cols()];
    for row in x.rows() {
        for &(c, v) in row {
            mu[c] += v;
        }
    }
    let n = T::of_usize(x.n_rows());
    mu.iter_mut().for_each(|m| *m /= n);
    mu
}

/// Fits weights minimizing `‖y − Xw − b‖² + λ‖w‖²`.
pub fn train_ridge<T: Scalar>(x: &SparseRows<T>, y: &[T], lambda: T) -> Result<RidgeModel<T>, ModelError> {
    if x.n_rows() != y.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} feature rows, {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(ModelError::DimensionMismatch("no training rows".into()));
    }
    if !(lambda >= T::zero()) {
        return Err(ModelError::InvalidParameter(format!(
            "lambda must be ≥ 0, got {lambda}"
        )));
    }
    let y_mean = mean(y);
    let yc: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let mu = column_means(x);
    let p = x.n_cols();
    let weights = if p == 0 {
        Vec::new()
    } else if lambda > T::zero() && x.n_rows() < p {
        solve_dual(x, &yc, &mu, lambda)?
    } else {
        solve_primal(x, &yc, &mu, lambda)?
    };
    let bias = y_mean - mu.iter().zip(&weights).map(|(&m, &w)| m * w).sum::<T>();
    Ok(RidgeModel { weights, bias, lambda })
}

/// `(XcᵀXc + λI) w = Xcᵀ yc`, with `XcᵀXc = XᵀX − n μμᵀ`.
fn solve_primal<T: Scalar>(x: &SparseRows<T>, yc: &[T], mu: &[T], lambda: T) -> Result<Vec<T>, ModelError> {
    let p = x.n_cols();
    let n = T::of_usize(x.n_rows());
    let mut gram = Dense::zeros(p, p);
    let mut rhs = vec![T::zero(); p];
    for (row, &t) in x.rows().zip(yc) {
        for &(a, va) in row {
            rhs[a] += va * t;
            for &(b, vb) in row {
                gram[(a, b)] += va * vb;
            }
        }
    }
    for a in 0..p {
        for b in 0..p {
            gram[(a, b)] -= n * mu[a] * mu[b];
        }
        gram[(a, a)] += lambda;
    }
    let ch = Cholesky::new(&gram, T::epsilon() * T::of(16.0))
        .map_err(|s| ModelError::Singular(format!("normal equations are rank deficient at feature {}", s.pivot)))?;
    Ok(ch.solve(&rhs))
}

/// `(Xc Xcᵀ + λI) a = yc`, `w = Xcᵀ a`.
fn solve_dual<T: Scalar>(x: &SparseRows<T>, yc: &[T], mu: &[T], lambda: T) -> Result<Vec<T>, ModelError> {
    let n = x.n_rows();
    let mu_sq: T = mu.iter().map(|&m| m * m).sum();
    let x_mu: Vec<T> = (0..n).map(|i| x.dot_row(i, mu)).collect();
    let mut kernel = Dense::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let v = sparse_dot(x.row(i), x.row(k)) - x_mu[i] - x_mu[k] + mu_sq;
            kernel[(i, k)] = v;
            kernel[(k, i)] = v;
        }
        kernel[(i, i)] += lambda;
    }
    let ch = Cholesky::new(&kernel, T::epsilon())
        .map_err(|s| ModelError::Singular(format!("dual system singular at row {}", s.pivot)))?;
    let a = ch.solve(yc);
    let a_sum: T = a.iter().copied().sum();
    let mut w: Vec<T> = mu.iter().map(|&m| -m * a_sum).collect();
    for (row, &ai) in x.rows().zip(&a) {
        for &(c, v) in row {
            w[c] += v * ai;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dense(rows: &[&[f64]]) -> SparseRows<f64> {
        SparseRows::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn zero_target_gives_zero_model() {
        let x = dense(&[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 1.0]]);
        let m = train_ridge(&x, &[0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(m.weights.iter().all(|w| *w == 0.0));
        assert_eq!(m.bias, 0.0);
    }

    #[test]
    fn one_feature_closed_form() {
        // x = (1,2,3), y = (1,3,2): xc = (-1,0,1), yc = (-1,1,0)
        // w = Σxc·yc / (Σxc² + λ) = 1 / (2 + 1) = 1/3; b = 2 − 2/3 = 4/3
        let x = dense(&[&[1.0], &[2.0], &[3.0]]);
        let m = train_ridge(&x, &[1.0, 3.0, 2.0], 1.0).unwrap();
        assert!((m.weights[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.bias - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_is_ols() {
        // y = 1 + 2 x1 − x2 exactly; 2×2 centered system is full rank
        let x = dense(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[2.0, 1.0]]);
        let y: Vec<f64> = (0..5)
            .map(|i| 1.0 + 2.0 * x.row_dense(i)[0] - x.row_dense(i)[1])
            .collect();
        let m = train_ridge(&x, &y, 0.0).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-10);
        assert!((m.weights[1] + 1.0).abs() < 1e-10);
        assert!((m.bias - 1.0).abs() < 1e-10);
    }

    #[test]
    fn huge_lambda_predicts_the_mean() {
        let x = dense(&[&[1.0], &[2.0], &[3.0]]);
        let m = train_ridge(&x, &[1.0, 3.0, 2.0], 1e9).unwrap();
        for p in m.predict(&x).unwrap() {
            assert!((p - 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn dimension_errors() {
        let x = dense(&[&[1.0], &[2.0]]);
        assert!(matches!(
            train_ridge(&x, &[1.0], 1.0),
            Err(ModelError::DimensionMismatch(_))
        ));
        let m = train_ridge(&x, &[1.0, 2.0], 1.0).unwrap();
        assert!(m.predict(&dense(&[&[1.0, 2.0]])).is_err());
    }

    fn normal_equation_residual(x: &SparseRows<f64>, y: &[f64], m: &RidgeModel<f64>) -> f64 {
        let p = x.n_cols();
        let n = x.n_rows();
        let ym = mean(y);
        let mu = column_means(x);
        let xc: Vec<Vec<f64>> = (0..n)
            .map(|i| x.row_dense(i).iter().zip(&mu).map(|(v, m)| v - m).collect())
            .collect();
        let fitted: Vec<f64> = xc
            .iter()
            .map(|r| r.iter().zip(&m.weights).map(|(a, b)| a * b).sum())
            .collect();
        (0..p)
            .map(|j| {
                let lhs: f64 = (0..n).map(|i| xc[i][j] * fitted[i]).sum::<f64>() + m.lambda * m.weights[j];
                let rhs: f64 = (0..n).map(|i| xc[i][j] * (y[i] - ym)).sum();
                (lhs - rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn primal_and_dual_satisfy_normal_equations() {
        let mut r = crate::stats::rng(3);
        for (n, p) in [(40usize, 12usize), (12, 40)] {
            let mut x = SparseRows::new(p);
            for _ in 0..n {
                let mut row = Vec::new();
                for c in 0..p {
                    if r.random_bool(0.3) {
                        row.push((c, r.random_range(1..4) as f64));
                    }
                }
                x.push_row(row);
            }
            let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let m = train_ridge(&x, &y, 1.0).unwrap();
            assert!(normal_equation_residual(&x, &y, &m) < 1e-8, "n={n} p={p}");
        }
    }
}
