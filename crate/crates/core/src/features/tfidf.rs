use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Smoothed inverse document frequencies, `ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfWeights {
    pub idf: Vec<f64>,
    pub n_docs_fitted: usize,
}

pub fn fit_idf(counts: &SparseMatrix) -> IdfWeights {
    let mut df = vec![0usize; counts.n_cols()];
    for &j in counts.indices() {
        df[j] += 1;
    }
    let n = counts.n_rows() as f64;
    IdfWeights {
        idf: df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect(),
        n_docs_fitted: counts.n_rows(),
    }
}

/// Scales counts by idf and L2-normalizes each nonzero row.
pub fn apply_tfidf(counts: &SparseMatrix, idf: &IdfWeights) -> Result<SparseMatrix> {
    if counts.n_cols() != idf.idf.len() {
        return Err(Error::DimensionMismatch {
            expected: idf.idf.len(),
            actual: counts.n_cols(),
        });
    }
    let rows = (0..counts.n_rows())
        .map(|i| {
            let (cols, vals) = counts.row(i);
            let weighted: Vec<(usize, f64)> = cols.iter().zip(vals).map(|(&j, &c)| (j, c * idf.idf[j])).collect();
            let norm = weighted.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                weighted.into_iter().map(|(j, v)| (j, v / norm)).collect()
            } else {
                weighted
            }
        })
        .collect();
    SparseMatrix::from_rows(counts.n_cols(), rows)
}
