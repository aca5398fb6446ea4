use serde::{Deserialize, Serialize};

use super::{check_dims, check_fit_inputs, FeatureMatrix};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// k-nearest neighbours under Euclidean distance. Distance ties go to the
/// lower training row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k_nn: usize,
    pub train: DenseMatrix,
    pub labels: Vec<u8>,
}

pub fn fit_knn(x: &FeatureMatrix, y: &[u8], k_nn: usize) -> Result<KnnModel> {
    check_fit_inputs(x, y)?;
    if k_nn == 0 || k_nn > y.len() {
        return Err(Error::InvalidArgument(format!(
            "k_nn must be in 1..={}, got {k_nn}",
            y.len()
        )));
    }
    Ok(KnnModel {
        k_nn,
        train: x.to_dense(),
        labels: y.to_vec(),
    })
}

impl KnnModel {
    /// Indices of the `k_nn` nearest training rows to `row`.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = (0..self.train.rows())
            .map(|j| {
                let d: f64 = self.train.row(j).iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, j)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist.into_iter().take(self.k_nn).map(|(_, j)| j).collect()
    }

    /// Fraction of class-1 labels among the neighbours.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        check_dims(x, self.train.cols())?;
        let dense = x.to_dense();
        Ok((0..dense.rows())
            .map(|i| {
                let pos = self
                    .neighbors(dense.row(i))
                    .into_iter()
                    .filter(|&j| self.labels[j] == 1)
                    .count();
                pos as f64 / self.k_nn as f64
            })
            .collect())
    }
}
