use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Row-compressed sparse matrix with nonnegative values.
///
/// Column indices are strictly increasing within each row and explicit
/// zeros are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != n_rows + 1 || indptr[0] != 0 {
            return Err(Error::Data("row offsets malformed".into()));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != values.len() {
            return Err(Error::Data("final row offset must equal stored count".into()));
        }
        for r in 0..n_rows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::Data(format!("row {r}: offsets not monotone")));
            }
            let cols = &indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::Data(format!("row {r}: column indices invalid")));
            }
            if values[lo..hi].iter().any(|&v| v == 0.0 || !v.is_finite() || v < 0.0) {
                return Err(Error::Data(format!("row {r}: values must be positive and finite")));
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds from per-row `(column, value)` lists; entries are sorted,
    /// duplicates summed and zeros dropped.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(values.len());
        }
        SparseMatrix::new(indptr.len() - 1, n_cols, indptr, indices, values)
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let rows = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(m.cols(), rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(columns, values)` of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let data = rows
            .iter()
            .map(|&r| {
                let (c, v) = self.row(r);
                c.iter().copied().zip(v.iter().copied()).collect()
            })
            .collect();
        SparseMatrix::from_rows(self.n_cols, data).expect("rows of a valid matrix")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d[(i, j)] = x;
            }
        }
        d
    }

    /// `self * rhs` for a dense `rhs` with `n_cols` rows.
    pub fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if rhs.rows() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: rhs.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(self.n_rows, rhs.cols());
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            let orow = out.row_mut(i);
            for (&j, &x) in c.iter().zip(v) {
                for (o, &r) in orow.iter_mut().zip(rhs.row(j)) {
                    *o += x * r;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs` for a dense `rhs` with `n_rows` rows.
    pub fn transpose_mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if rhs.rows() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                actual: rhs.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(self.n_cols, rhs.cols());
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                for (o, &r) in out.row_mut(j).iter_mut().zip(rhs.row(i)) {
                    *o += x * r;
                }
            }
        }
        Ok(out)
    }
}
