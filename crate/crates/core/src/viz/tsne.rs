//! Exact t-SNE.
//!
//! Identical input rows are merged into one point carrying a multiplicity
//! `m_i`. Conditionals count neighbour `j` `m_j` times, the joint is
//! `P_ij = (m_i p_j|i + m_j p_i|j) / 2N` with `N = sum m`, and the
//! embedding kernel is weighted by `m_i m_j`. Without duplicates this is the
//! textbook algorithm.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const ENTROPY_TOL: f64 = 1e-5;
pub const MAX_BISECTION_STEPS: usize = 50;
/// Early-exit threshold, far inside the contract tolerance so sigma itself converges.
const ENTROPY_STOP: f64 = 1e-12;
const LN_BETA_RANGE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub n_iters: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    /// Momentum is 0.5 before this iteration and 0.8 from it on.
    pub momentum_switch: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            n_iters: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            momentum_switch: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    /// One point per input row; duplicates share coordinates.
    pub points: Vec<[f64; 2]>,
    pub kl: f64,
    /// KL right after the exaggeration phase, if it ended before `n_iters`.
    pub kl_exaggeration_end: Option<f64>,
    pub n_unique: usize,
}

/// Entropy in bits of `p_j ∝ w_j exp(-beta (d_j - d_min))`, plus the
/// normalized probabilities.
fn entropy(sq: &[f64], weights: &[f64], beta: f64, out: &mut [f64]) -> f64 {
    let dmin = sq.iter().copied().fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    for ((o, &d), &w) in out.iter_mut().zip(sq).zip(weights) {
        *o = w * (-beta * (d - dmin)).exp();
        z += *o;
    }
    let mut h = 0.0;
    for o in out.iter_mut() {
        *o /= z;
        if *o > 0.0 {
            h -= *o * o.log2();
        }
    }
    h
}

/// Bisection on `ln beta` with `beta = 1 / (2 sigma^2)`; returns `beta` and
/// fills `out` with the calibrated conditional.
fn calibrate_row(sq: &[f64], weights: &[f64], target: f64, row: usize, out: &mut [f64]) -> Result<f64> {
    if sq.iter().all(|&d| d == 0.0) {
        return Err(Error::DuplicatePoint(row));
    }
    let (mut lo, mut hi) = (-LN_BETA_RANGE, LN_BETA_RANGE);
    let mut ln_beta = 0.0f64;
    for _ in 0..MAX_BISECTION_STEPS {
        let h = entropy(sq, weights, ln_beta.exp(), out);
        if (h - target).abs() < ENTROPY_STOP {
            break;
        }
        // entropy falls as beta grows
        if h > target {
            lo = ln_beta;
        } else {
            hi = ln_beta;
        }
        ln_beta = 0.5 * (lo + hi);
    }
    let beta = ln_beta.exp();
    entropy(sq, weights, beta, out);
    Ok(beta)
}

/// Per-point bandwidth `sigma_i` making the conditional's base-2 entropy
/// `log2(perplexity)`. `sq_distances[i]` holds the squared distances from
/// point `i` to every other point.
pub fn calibrate_sigma(sq_distances: &[Vec<f64>], perplexity: f64) -> Result<Vec<f64>> {
    let n = sq_distances.len();
    if !(perplexity > 1.0 && perplexity < n as f64) {
        return Err(Error::InvalidArgument(format!(
            "perplexity must be in (1, {n}), got {perplexity}"
        )));
    }
    let target = perplexity.log2();
    sq_distances
        .iter()
        .enumerate()
        .map(|(i, sq)| {
            let w = vec![1.0; sq.len()];
            let mut out = vec![0.0; sq.len()];
            calibrate_row(sq, &w, target, i, &mut out).map(|beta| (0.5 / beta).sqrt())
        })
        .collect()
}

/// Merges identical rows; returns unique rows, multiplicities and the
/// unique index of every input row.
pub fn deduplicate(x: &DenseMatrix) -> (DenseMatrix, Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let key = |i: usize| x.row(i).iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    order.sort_by_key(|&i| (key(i), i));
    let mut first_of = vec![usize::MAX; x.rows()];
    for w in 0..order.len() {
        let i = order[w];
        first_of[i] = if w > 0 && key(order[w - 1]) == key(i) {
            first_of[order[w - 1]]
        } else {
            i
        };
    }
    let mut unique_rows = Vec::new();
    let mut mult = Vec::new();
    let mut slot = vec![usize::MAX; x.rows()];
    let mut map = vec![0; x.rows()];
    for i in 0..x.rows() {
        let f = first_of[i];
        if slot[f] == usize::MAX {
            slot[f] = unique_rows.len();
            unique_rows.push(x.row(f).to_vec());
            mult.push(0.0);
        }
        map[i] = slot[f];
        mult[slot[f]] += 1.0;
    }
    let m = DenseMatrix::from_rows(&unique_rows).unwrap_or_else(|_| DenseMatrix::zeros(0, x.cols()));
    (m, mult, map)
}

/// Symmetric joint affinities over unique points.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    n: usize,
    p: Vec<f64>,
    mult: Vec<f64>,
}

impl Affinities {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.mult
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Affinities of distinct rows `x` with multiplicities `mult`.
pub fn joint_probabilities(x: &DenseMatrix, mult: &[f64], perplexity: f64) -> Result<Affinities> {
    let n = x.rows();
    if !(perplexity > 1.0 && perplexity < n as f64) {
        return Err(Error::InvalidArgument(format!(
            "perplexity must be in (1, {n}) distinct points, got {perplexity}"
        )));
    }
    let target = perplexity.log2();
    let cond: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let sq: Vec<f64> = others.iter().map(|&j| sq_dist(x.row(i), x.row(j))).collect();
            let w: Vec<f64> = others.iter().map(|&j| mult[j]).collect();
            let mut out = vec![0.0; others.len()];
            calibrate_row(&sq, &w, target, i, &mut out)?;
            let mut row = vec![0.0; n];
            for (&j, v) in others.iter().zip(out) {
                row[j] = v;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let total: f64 = mult.iter().sum();
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = (mult[i] * cond[i][j] + mult[j] * cond[j][i]) / (2.0 * total);
            }
        }
    }
    Ok(Affinities {
        n,
        p,
        mult: mult.to_vec(),
    })
}

/// Student-t kernel weights `w_ij = 1 / (1 + |y_i - y_j|^2)` and the
/// normalizer `Z = sum_{i != j} m_i m_j w_ij`.
fn kernel(y: &[[f64; 2]], mult: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let w: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                0.0
            } else {
                1.0 / (1.0 + sq_dist(&y[i], &y[j]))
            }
        })
        .collect();
    let z = (0..n)
        .map(|i| (0..n).map(|j| mult[i] * mult[j] * w[i * n + j]).sum::<f64>())
        .sum();
    (w, z)
}

pub fn kl_divergence(p: &Affinities, y: &[[f64; 2]]) -> f64 {
    let (w, z) = kernel(y, &p.mult);
    let n = p.n;
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p.p[i * n + j];
            if pij > 0.0 {
                let q = p.mult[i] * p.mult[j] * w[i * n + j] / z;
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

/// `dKL/dy_i = 4 sum_j (e P_ij - Q_ij) w_ij (y_i - y_j)` with exaggeration `e`.
pub fn kl_gradient(p: &Affinities, y: &[[f64; 2]], exaggeration: f64) -> Vec<[f64; 2]> {
    let (w, z) = kernel(y, &p.mult);
    let n = p.n;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let wij = w[i * n + j];
                let q = p.mult[i] * p.mult[j] * wij / z;
                let f = 4.0 * (exaggeration * p.p[i * n + j] - q) * wij;
                g[0] += f * (y[i][0] - y[j][0]);
                g[1] += f * (y[i][1] - y[j][1]);
            }
            g
        })
        .collect()
}

fn recenter(y: &mut [[f64; 2]]) {
    let n = y.len() as f64;
    let c = y.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    for p in y.iter_mut() {
        p[0] -= c[0] / n;
        p[1] -= c[1] / n;
    }
}

/// Gradient descent with momentum and per-coordinate gains. After the
/// exaggeration phase a step that raises KL is halved until it does not
/// (at most 30 times, else skipped), so KL never increases there.
pub fn tsne(x: &DenseMatrix, config: &TsneConfig) -> Result<Embedding2D> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument("t-SNE input has non-finite values".into()));
    }
    if config.n_iters == 0
        || !config.learning_rate.is_finite()
        || config.learning_rate <= 0.0
        || config.early_exaggeration < 1.0
    {
        return Err(Error::InvalidArgument(format!(
            "invalid t-SNE configuration {config:?}"
        )));
    }
    let (unique, mult, map) = deduplicate(x);
    if unique.rows() < 4 {
        return Err(Error::InvalidArgument(format!(
            "t-SNE needs at least 4 distinct points, got {}",
            unique.rows()
        )));
    }
    if unique.rows() < x.rows() {
        log::info!(
            "t-SNE: merged {} duplicate rows into {} distinct points",
            x.rows() - unique.rows(),
            unique.rows()
        );
    }
    let p = joint_probabilities(&unique, &mult, config.perplexity)?;
    let n = unique.rows();
    let mut rng = crate::seed::rng(config.seed);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [1e-4 * a, 1e-4 * b]
        })
        .collect();
    recenter(&mut y);
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_exaggeration_end = None;
    let mut current_kl = f64::NAN;
    for it in 0..config.n_iters {
        let exaggerating = it < config.exaggeration_iters;
        if it == config.exaggeration_iters {
            current_kl = kl_divergence(&p, &y);
            kl_exaggeration_end = Some(current_kl);
        }
        let e = if exaggerating { config.early_exaggeration } else { 1.0 };
        let momentum = if it < config.momentum_switch { 0.5 } else { 0.8 };
        let grad = kl_gradient(&p, &y, e);
        for i in 0..n {
            for c in 0..2 {
                gains[i][c] = if (grad[i][c] > 0.0) != (update[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(0.01)
                };
                update[i][c] = momentum * update[i][c] - config.learning_rate * gains[i][c] * grad[i][c];
            }
        }
        if exaggerating {
            for (yi, u) in y.iter_mut().zip(&update) {
                yi[0] += u[0];
                yi[1] += u[1];
            }
            recenter(&mut y);
            continue;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = y.clone();
            for (yi, u) in cand.iter_mut().zip(&update) {
                yi[0] += u[0];
                yi[1] += u[1];
            }
            recenter(&mut cand);
            let kl = kl_divergence(&p, &cand);
            if kl.is_finite() && kl <= current_kl {
                y = cand;
                current_kl = kl;
                accepted = true;
                break;
            }
            for u in update.iter_mut() {
                u[0] *= 0.5;
                u[1] *= 0.5;
            }
        }
        if !accepted {
            update.iter_mut().for_each(|u| *u = [0.0; 2]);
        }
    }
    let kl = kl_divergence(&p, &y);
    if !kl.is_finite() || y.iter().any(|q| !q[0].is_finite() || !q[1].is_finite()) {
        return Err(Error::Numeric("t-SNE diverged".into()));
    }
    Ok(Embedding2D {
        points: map.iter().map(|&u| y[u]).collect(),
        kl,
        kl_exaggeration_end,
        n_unique: n,
    })
}
