//! Random forest of Gini trees.
//!
//! Tree `i` uses its own RNG seeded with `seed + i` for both the bootstrap
//! resample and per-split feature sampling, so trees can be trained in any
//! order (or in parallel) with identical results.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, DecisionTree, TreeParams};
use super::{check_dims, check_fit_inputs, FeatureMatrix};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Trees work on a densified copy; wider inputs are rejected.
pub const MAX_DENSE_FEATURES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 200,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub tree_seeds: Vec<u64>,
    /// Features evaluated per split, `ceil(sqrt(d))`.
    pub max_features: usize,
    pub n_features: usize,
}

fn prepare(x: &FeatureMatrix, y: &[u8], params: &ForestParams) -> Result<(DenseMatrix, TreeParams)> {
    check_fit_inputs(x, y)?;
    if params.n_estimators == 0 {
        return Err(Error::InvalidArgument("n_estimators must be at least 1".into()));
    }
    if x.n_rows() < 2 {
        return Err(Error::InvalidArgument("forest needs at least 2 training rows".into()));
    }
    if x.n_cols() > MAX_DENSE_FEATURES {
        return Err(Error::InvalidArgument(format!(
            "{} features exceed the forest limit of {MAX_DENSE_FEATURES}",
            x.n_cols()
        )));
    }
    let d = x.n_cols();
    let max_features = (d as f64).sqrt().ceil() as usize;
    Ok((
        x.to_dense(),
        TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(max_features.max(1)),
        },
    ))
}

fn one_tree(x: &DenseMatrix, y: &[u8], tp: &TreeParams, bootstrap: bool, seed: u64) -> DecisionTree {
    let mut rng = crate::seed::rng(seed);
    let n = x.rows();
    let samples = if bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    fit_tree(x, y, samples, tp, &mut rng)
}

fn assemble(trees: Vec<DecisionTree>, seed: u64, tp: &TreeParams, d: usize) -> ForestModel {
    ForestModel {
        tree_seeds: (0..trees.len()).map(|i| crate::seed::derive(seed, i)).collect(),
        trees,
        max_features: tp.max_features.unwrap_or(d),
        n_features: d,
    }
}

/// Trains the trees in parallel.
pub fn fit_forest(x: &FeatureMatrix, y: &[u8], params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let (dense, tp) = prepare(x, y, params)?;
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|i| one_tree(&dense, y, &tp, params.bootstrap, crate::seed::derive(seed, i)))
        .collect();
    Ok(assemble(trees, seed, &tp, x.n_cols()))
}

/// Trains the trees one after another; same result as [`fit_forest`].
pub fn fit_forest_serial(x: &FeatureMatrix, y: &[u8], params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let (dense, tp) = prepare(x, y, params)?;
    let trees = (0..params.n_estimators)
        .map(|i| one_tree(&dense, y, &tp, params.bootstrap, crate::seed::derive(seed, i)))
        .collect();
    Ok(assemble(trees, seed, &tp, x.n_cols()))
}

impl ForestModel {
    /// Mean over trees of the leaf class-1 fraction.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        check_dims(x, self.n_features)?;
        let dense = x.to_dense();
        let n_trees = self.trees.len() as f64;
        Ok((0..dense.rows())
            .map(|i| {
                let row = dense.row(i);
                self.trees.iter().map(|t| t.proba(row)).sum::<f64>() / n_trees
            })
            .collect())
    }

    /// `[p(class 0), p(class 1)]` per row.
    pub fn predict_proba_both(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| [1.0 - p, p]).collect())
    }
}
