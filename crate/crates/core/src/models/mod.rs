//! Binary classifiers sharing one contract: fit on a [`FeatureMatrix`] with
//! 0/1 labels, then predict the probability of class 1 per row.

mod ensemble;
mod forest;
mod knn;
mod logreg;
mod naive_bayes;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseMatrix;
use crate::linalg::DenseMatrix;

pub use ensemble::{vote, VotingEnsemble, VotingMode};
pub use forest::{fit_forest, fit_forest_serial, ForestModel, ForestParams, MAX_DENSE_FEATURES};
pub use knn::{fit_knn, KnnModel};
pub use logreg::{fit_logreg, fit_logreg_traced, logreg_gradient, logreg_objective, LogRegModel, LogRegParams};
pub use naive_bayes::{fit_naive_bayes, NaiveBayesModel};
pub use tree::{fit_tree, split_gini, DecisionTree, TreeNode, TreeParams};

/// Design matrix consumed by the classifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMatrix {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

impl From<SparseMatrix> for FeatureMatrix {
    fn from(m: SparseMatrix) -> Self {
        FeatureMatrix::Sparse(m)
    }
}

impl From<DenseMatrix> for FeatureMatrix {
    fn from(m: DenseMatrix) -> Self {
        FeatureMatrix::Dense(m)
    }
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.n_rows(),
            FeatureMatrix::Dense(m) => m.rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.n_cols(),
            FeatureMatrix::Dense(m) => m.cols(),
        }
    }

    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        match self {
            FeatureMatrix::Sparse(m) => {
                let (c, v) = m.row(i);
                c.iter().zip(v).map(|(&j, &x)| x * w[j]).sum()
            }
            FeatureMatrix::Dense(m) => crate::linalg::dot(m.row(i), w),
        }
    }

    /// `out += alpha * row(i)`
    pub fn add_row_scaled(&self, i: usize, alpha: f64, out: &mut [f64]) {
        match self {
            FeatureMatrix::Sparse(m) => {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    out[j] += alpha * x;
                }
            }
            FeatureMatrix::Dense(m) => {
                for (o, &x) in out.iter_mut().zip(m.row(i)) {
                    *o += alpha * x;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            FeatureMatrix::Sparse(m) => m.to_dense(),
            FeatureMatrix::Dense(m) => m.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureMatrix::Sparse(m) => m.values().iter().all(|v| v.is_finite()),
            FeatureMatrix::Dense(m) => m.is_finite(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            FeatureMatrix::Sparse(_) => true,
            FeatureMatrix::Dense(m) => m.as_slice().iter().all(|&v| v >= 0.0),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        match self {
            FeatureMatrix::Sparse(m) => FeatureMatrix::Sparse(m.select_rows(rows)),
            FeatureMatrix::Dense(m) => {
                let mut out = DenseMatrix::zeros(rows.len(), m.cols());
                for (o, &r) in rows.iter().enumerate() {
                    out.row_mut(o).copy_from_slice(m.row(r));
                }
                FeatureMatrix::Dense(out)
            }
        }
    }
}

pub(crate) fn check_fit_inputs(x: &FeatureMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::InvalidArgument("empty training matrix".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!("non-binary label {bad}")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("non-finite feature values".into()));
    }
    Ok(())
}

pub(crate) fn check_dims(x: &FeatureMatrix, n_features: usize) -> Result<()> {
    if x.n_cols() != n_features {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            actual: x.n_cols(),
        });
    }
    Ok(())
}

/// Hyperparameters selecting a classifier family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Logreg(LogRegParams),
    Forest(ForestParams),
    NaiveBayes { alpha: f64 },
    Knn { k_nn: usize },
}

impl ClassifierSpec {
    /// Short name used in report rows.
    pub fn short_name(&self) -> &'static str {
        match self {
            ClassifierSpec::Logreg(_) => "logreg",
            ClassifierSpec::Forest(_) => "RF",
            ClassifierSpec::NaiveBayes { .. } => "NB",
            ClassifierSpec::Knn { .. } => "kNN",
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ClassifierSpec::Logreg(_) => "logreg",
            ClassifierSpec::Forest(_) => "forest",
            ClassifierSpec::NaiveBayes { .. } => "naive_bayes",
            ClassifierSpec::Knn { .. } => "knn",
        }
    }

    pub fn requires_nonnegative(&self) -> bool {
        matches!(self, ClassifierSpec::NaiveBayes { .. })
    }

    pub fn fit(&self, x: &FeatureMatrix, y: &[u8], seed: u64) -> Result<Classifier> {
        Ok(match self {
            ClassifierSpec::Logreg(p) => Classifier::Logreg(fit_logreg(x, y, p)?),
            ClassifierSpec::Forest(p) => Classifier::Forest(fit_forest(x, y, p, seed)?),
            ClassifierSpec::NaiveBayes { alpha } => Classifier::NaiveBayes(fit_naive_bayes(x, y, *alpha)?),
            ClassifierSpec::Knn { k_nn } => Classifier::Knn(fit_knn(x, y, *k_nn)?),
        })
    }
}

/// A fitted classifier of any registered family.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Logreg(LogRegModel),
    Forest(ForestModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
}

impl Classifier {
    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Logreg(m) => m.weights.len(),
            Classifier::Forest(m) => m.n_features,
            Classifier::NaiveBayes(m) => m.n_features(),
            Classifier::Knn(m) => m.train.cols(),
        }
    }

    /// Probability of class 1 for every row.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Classifier::Logreg(m) => m.predict_proba(x),
            Classifier::Forest(m) => m.predict_proba(x),
            Classifier::NaiveBayes(m) => m.predict_proba(x),
            Classifier::Knn(m) => m.predict_proba(x),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        Ok(threshold(&self.predict_proba(x)?))
    }
}

/// Label 1 iff probability >= 0.5.
pub fn threshold(probs: &[f64]) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p >= 0.5)).collect()
}
