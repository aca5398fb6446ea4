//! L2-regularized logistic regression.
//!
//! Minimizes `0.5 * |w|^2 + c_reg * sum_i softplus(-s_i * (w . x_i + b))`
//! with `s_i = +1/-1` for labels 1/0. The intercept is not penalized.
//! Optimizer: full-batch gradient descent with Armijo backtracking; the trial
//! step starts from the Barzilai-Borwein estimate of the previous iterate.

use serde::{Deserialize, Serialize};

use super::{check_dims, check_fit_inputs, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub c_reg: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            c_reg: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c_reg: f64,
    pub converged: bool,
    pub n_iters: usize,
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn sign(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Regularized objective at `(w, b)`.
pub fn logreg_objective(x: &FeatureMatrix, y: &[u8], w: &[f64], b: f64, c_reg: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = (0..x.n_rows())
        .map(|i| softplus(-sign(y[i]) * (x.row_dot(i, w) + b)))
        .sum();
    reg + c_reg * loss
}

/// Gradient with respect to `(w, b)`; the last entry is the intercept.
pub fn logreg_gradient(x: &FeatureMatrix, y: &[u8], w: &[f64], b: f64, c_reg: f64) -> Vec<f64> {
    let d = w.len();
    let mut g = vec![0.0; d + 1];
    g[..d].copy_from_slice(w);
    for i in 0..x.n_rows() {
        let s = sign(y[i]);
        let coef = -c_reg * s * sigmoid(-s * (x.row_dot(i, w) + b));
        x.add_row_scaled(i, coef, &mut g[..d]);
        g[d] += coef;
    }
    g
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn fit_logreg(x: &FeatureMatrix, y: &[u8], params: &LogRegParams) -> Result<LogRegModel> {
    fit_logreg_traced(x, y, params).map(|(m, _)| m)
}

/// Like [`fit_logreg`], also returning the objective after every iteration
/// (starting with the initial point).
pub fn fit_logreg_traced(x: &FeatureMatrix, y: &[u8], params: &LogRegParams) -> Result<(LogRegModel, Vec<f64>)> {
    check_fit_inputs(x, y)?;
    if !(params.c_reg > 0.0 && params.c_reg.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "c_reg must be positive, got {}",
            params.c_reg
        )));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::InvalidArgument(
            "logistic regression needs both classes in the training labels".into(),
        ));
    }
    let d = x.n_cols();
    let c = params.c_reg;
    let mut theta = vec![0.0; d + 1];
    let eval = |t: &[f64]| logreg_objective(x, y, &t[..d], t[d], c);
    let grad = |t: &[f64]| logreg_gradient(x, y, &t[..d], t[d], c);

    let mut f = eval(&theta);
    let mut g = grad(&theta);
    let mut trace = vec![f];
    let mut step = 1.0 / (1.0 + c * x.n_rows() as f64);
    let mut converged = inf_norm(&g) <= params.tol;
    let mut iters = 0;
    while !converged && iters < params.max_iter {
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step;
        let (next, f_next) = loop {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(p, gi)| p - t * gi).collect();
            let fc = eval(&cand);
            if fc <= f - 1e-4 * t * g2 {
                break (cand, fc);
            }
            t *= 0.5;
            if t < 1e-30 {
                // no further decrease possible at machine precision
                let model = LogRegModel {
                    weights: theta[..d].to_vec(),
                    intercept: theta[d],
                    c_reg: c,
                    converged: false,
                    n_iters: iters,
                };
                return Ok((model, trace));
            }
        };
        let g_next = grad(&next);
        // Barzilai-Borwein step for the next trial
        let (mut sy, mut yy) = (0.0, 0.0);
        for k in 0..=d {
            let s = next[k] - theta[k];
            let yv = g_next[k] - g[k];
            sy += s * yv;
            yy += yv * yv;
        }
        step = if sy > 0.0 && yy > 0.0 { sy / yy } else { t * 2.0 };
        theta = next;
        f = f_next;
        g = g_next;
        trace.push(f);
        iters += 1;
        converged = inf_norm(&g) <= params.tol;
    }
    let model = LogRegModel {
        weights: theta[..d].to_vec(),
        intercept: theta[d],
        c_reg: c,
        converged,
        n_iters: iters,
    };
    Ok((model, trace))
}

impl LogRegModel {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        check_dims(x, self.weights.len())?;
        Ok((0..x.n_rows())
            .map(|i| sigmoid(x.row_dot(i, &self.weights) + self.intercept))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use rand::Rng;

    fn dense(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::Dense(DenseMatrix::from_rows(rows).unwrap())
    }

    /// Root of `w - 2 sigmoid(-w)` by bisection.
    fn symmetric_root() -> f64 {
        let (mut lo, mut hi) = (0.0f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - 2.0 / (1.0 + mid.exp()) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetric_instance() {
        let x = dense(&[vec![1.0], vec![-1.0]]);
        let m = fit_logreg(&x, &[1, 0], &LogRegParams::default()).unwrap();
        assert!(m.converged);
        assert!(m.intercept.abs() < 1e-6);
        let root = symmetric_root();
        assert!((root - 0.6748316143423994).abs() < 1e-12);
        assert!((m.weights[0] - root).abs() < 1e-6);
        let g = logreg_gradient(&x, &[1, 0], &m.weights, m.intercept, 1.0);
        assert!(inf_norm(&g) <= 1e-6);
    }

    #[test]
    fn zero_model_is_half() {
        let m = LogRegModel {
            weights: vec![0.0, 0.0],
            intercept: 0.0,
            c_reg: 1.0,
            converged: true,
            n_iters: 0,
        };
        let p = m.predict_proba(&dense(&[vec![3.0, -1.0], vec![0.0, 9.0]])).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
        assert!(m.predict_proba(&dense(&[vec![1.0]])).is_err());
    }

    #[test]
    fn input_errors() {
        let x = dense(&[vec![1.0], vec![2.0]]);
        assert!(fit_logreg(&x, &[1, 1], &LogRegParams::default()).is_err());
        let bad = dense(&[vec![f64::NAN], vec![2.0]]);
        assert!(fit_logreg(&bad, &[1, 0], &LogRegParams::default()).is_err());
        let p = LogRegParams {
            c_reg: 0.0,
            ..Default::default()
        };
        assert!(fit_logreg(&x, &[1, 0], &p).is_err());
    }

    #[test]
    fn objective_decreases_monotonically() {
        let mut rng = crate::seed::rng(3);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..5).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] + 0.5 * r[1] + rng.random_range(-1.0..1.0) > 0.0))
            .collect();
        let (m, trace) = fit_logreg_traced(&dense(&rows), &y, &LogRegParams::default()).unwrap();
        assert!(m.converged);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_loss_nonincreasing_in_c() {
        let mut rng = crate::seed::rng(8);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] - r[2] + rng.random_range(-0.8..0.8) > 0.0))
            .collect();
        let x = dense(&rows);
        let mut prev = f64::INFINITY;
        for c in [0.01, 0.1, 1.0, 10.0] {
            let params = LogRegParams {
                c_reg: c,
                tol: 1e-9,
                max_iter: 20000,
            };
            let m = fit_logreg(&x, &y, &params).unwrap();
            let loss = (logreg_objective(&x, &y, &m.weights, m.intercept, 1.0)
                - 0.5 * m.weights.iter().map(|w| w * w).sum::<f64>())
            .max(0.0);
            assert!(loss <= prev + 1e-9, "c={c}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn sparse_and_dense_agree() {
        let rows = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, 1.0, 0.0],
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 1.0],
        ];
        let d = dense(&rows);
        let s = FeatureMatrix::Sparse(crate::features::SparseMatrix::from_dense(&d.to_dense()).unwrap());
        let y = [1, 0, 1, 0];
        let a = fit_logreg(&d, &y, &LogRegParams::default()).unwrap();
        let b = fit_logreg(&s, &y, &LogRegParams::default()).unwrap();
        for (x, z) in a.weights.iter().zip(&b.weights) {
            assert!((x - z).abs() < 1e-12);
        }
    }
}
