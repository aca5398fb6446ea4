use serde::{Deserialize, Serialize};

use super::{check_dims, check_fit_inputs, FeatureMatrix};
use crate::error::{Error, Result};

/// Multinomial naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `ln((count_cj + alpha) / (total_c + alpha * d))`, one row per class.
    pub feature_log_prob: [Vec<f64>; 2],
}

pub fn fit_naive_bayes(x: &FeatureMatrix, y: &[u8], alpha: f64) -> Result<NaiveBayesModel> {
    check_fit_inputs(x, y)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !x.is_nonnegative() {
        return Err(Error::InvalidArgument(
            "multinomial naive Bayes needs nonnegative features".into(),
        ));
    }
    let d = x.n_cols();
    let mut counts = [vec![0.0; d], vec![0.0; d]];
    let mut n_class = [0usize; 2];
    for (i, &label) in y.iter().enumerate() {
        x.add_row_scaled(i, 1.0, &mut counts[label as usize]);
        n_class[label as usize] += 1;
    }
    let n = y.len() as f64;
    let log_prob = |c: &Vec<f64>| -> Vec<f64> {
        let denom = (c.iter().sum::<f64>() + alpha * d as f64).ln();
        c.iter().map(|&v| (v + alpha).ln() - denom).collect()
    };
    // an absent class gets zero prior probability
    let prior = |k: usize| {
        if n_class[k] == 0 {
            f64::NEG_INFINITY
        } else {
            (n_class[k] as f64 / n).ln()
        }
    };
    Ok(NaiveBayesModel {
        alpha,
        class_log_prior: [prior(0), prior(1)],
        feature_log_prob: [log_prob(&counts[0]), log_prob(&counts[1])],
    })
}

impl NaiveBayesModel {
    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// Unnormalized log posterior of each class for row `i`.
    pub fn joint_log_likelihood(&self, x: &FeatureMatrix, i: usize) -> [f64; 2] {
        [
            self.class_log_prior[0] + x.row_dot(i, &self.feature_log_prob[0]),
            self.class_log_prior[1] + x.row_dot(i, &self.feature_log_prob[1]),
        ]
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        check_dims(x, self.n_features())?;
        Ok((0..x.n_rows())
            .map(|i| {
                let [l0, l1] = self.joint_log_likelihood(x, i);
                if l1 == f64::NEG_INFINITY {
                    0.0
                } else if l0 == f64::NEG_INFINITY {
                    1.0
                } else {
                    super::logreg::sigmoid(l1 - l0)
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn dense(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::Dense(DenseMatrix::from_rows(rows).unwrap())
    }

    #[test]
    fn memorizes_one_doc_per_class() {
        let x = dense(&[vec![3.0, 0.0, 1.0], vec![0.0, 2.0, 1.0]]);
        let m = fit_naive_bayes(&x, &[0, 1], 1.0).unwrap();
        let p = m.predict_proba(&x).unwrap();
        assert!(p[0] < 0.5 && p[1] > 0.5);
    }

    #[test]
    fn smoothing_formula() {
        let x = dense(&[vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let m = fit_naive_bayes(&x, &[0, 1], 0.5).unwrap();
        // feature 1 unseen in class 0: alpha / (total_0 + alpha * d)
        let expected = 0.5 / (2.0 + 0.5 * 3.0);
        assert!((m.feature_log_prob[0][1].exp() - expected).abs() < 1e-15);
        for c in 0..2 {
            let s: f64 = m.feature_log_prob[c].iter().map(|v| v.exp()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_posterior_two_ways() {
        let x = dense(&[vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let m = fit_naive_bayes(&x, &[0, 1, 1], 1.0).unwrap();
        let q = dense(&[vec![1.0, 2.0, 1.0]]);
        let jll = m.joint_log_likelihood(&q, 0);
        for c in 0..2 {
            let row = [1.0, 2.0, 1.0];
            let product: f64 = m.class_log_prior[c].exp()
                * row
                    .iter()
                    .zip(&m.feature_log_prob[c])
                    .map(|(&k, lp)| lp.exp().powf(k))
                    .product::<f64>();
            assert!((product.ln() - jll[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_negative_features() {
        let x = dense(&[vec![-1.0], vec![1.0]]);
        assert!(fit_naive_bayes(&x, &[0, 1], 1.0).is_err());
        assert!(fit_naive_bayes(&dense(&[vec![1.0], vec![1.0]]), &[0, 1], 0.0).is_err());
    }
}
