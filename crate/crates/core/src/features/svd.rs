//! Truncated SVD for latent semantic analysis.
//!
//! Small problems (`min(rows, cols) <= DENSE_LIMIT`) are solved exactly with
//! the dense Golub-Kahan-Reinsch kernel. Larger ones use a randomized range
//! finder with power iterations, followed by an exact SVD of the projected
//! `l x n` matrix.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

pub const DENSE_LIMIT: usize = 200;
pub const OVERSAMPLING: usize = 10;
pub const POWER_ITERATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdMethod {
    #[default]
    Auto,
    Dense,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdModel {
    pub k: usize,
    pub singular_values: Vec<f64>,
    /// `n_cols x k`, orthonormal columns.
    pub right_vectors: DenseMatrix,
    /// `n_rows x k` for the fitted matrix; not persisted.
    #[serde(skip)]
    pub left_vectors: Option<DenseMatrix>,
}

pub fn truncated_svd(x: &SparseMatrix, k: usize, seed: u64) -> Result<SvdModel> {
    truncated_svd_with(x, k, seed, SvdMethod::Auto)
}

pub fn truncated_svd_with(x: &SparseMatrix, k: usize, seed: u64, method: SvdMethod) -> Result<SvdModel> {
    let limit = x.n_rows().min(x.n_cols());
    if k == 0 || k > limit {
        return Err(Error::InvalidArgument(format!("SVD rank {k} outside 1..={limit}")));
    }
    let dense = match method {
        SvdMethod::Auto => limit <= DENSE_LIMIT,
        SvdMethod::Dense => true,
        SvdMethod::Randomized => false,
    };
    let full = if dense {
        linalg::svd(&x.to_dense())?
    } else {
        randomized(x, k, seed)?
    };
    let mut u = full.u.take_columns(k);
    let mut v = full.v.take_columns(k);
    fix_signs(&mut u, &mut v);
    Ok(SvdModel {
        k,
        singular_values: full.s[..k].to_vec(),
        right_vectors: v,
        left_vectors: Some(u),
    })
}

fn randomized(x: &SparseMatrix, k: usize, seed: u64) -> Result<linalg::DenseSvd> {
    let (m, n) = (x.n_rows(), x.n_cols());
    let l = (k + OVERSAMPLING).min(m.min(n));
    let mut rng = crate::seed::rng(seed);
    let omega_data: Vec<f64> = (0..n * l).map(|_| StandardNormal.sample(&mut rng)).collect();
    let omega = DenseMatrix::from_vec(n, l, omega_data)?;
    let mut q = linalg::orthonormal_basis(&x.mul_dense(&omega)?);
    for _ in 0..POWER_ITERATIONS {
        let z = linalg::orthonormal_basis(&x.transpose_mul_dense(&q)?);
        q = linalg::orthonormal_basis(&x.mul_dense(&z)?);
    }
    // B = Q^T X, stored transposed as X^T Q (n x l)
    let bt = x.transpose_mul_dense(&q)?;
    let small = linalg::svd(&bt)?;
    // B^T = W S Z^T  =>  B = Z S W^T, so U = Q Z and V = W
    let u = q.matmul(&small.v)?;
    Ok(linalg::DenseSvd {
        u,
        s: small.s,
        v: small.u,
    })
}

/// Makes the largest-magnitude entry of each right vector positive.
fn fix_signs(u: &mut DenseMatrix, v: &mut DenseMatrix) {
    for j in 0..v.cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..v.rows() {
            let x = v[(i, j)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
}

/// LSA embedding `X V` (no singular-value scaling).
pub fn project(model: &SvdModel, x: &SparseMatrix) -> Result<DenseMatrix> {
    if x.n_cols() != model.right_vectors.rows() {
        return Err(Error::DimensionMismatch {
            expected: model.right_vectors.rows(),
            actual: x.n_cols(),
        });
    }
    x.mul_dense(&model.right_vectors)
}
