use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{confusion, metrics, stratified_kfold, ConfusionCounts, MetricSet};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::ModelSpec;
use crate::textprep::LexiconSet;

/// Recorded in every report: the spread is the sample standard deviation.
pub const STD_CONVENTION: &str = "sample (n-1)";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl MetricSummary {
    /// Mean and sample standard deviation; `std` is 0 for fewer than two values.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return MetricSummary::default();
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MetricSummary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: MetricSet,
    pub counts: ConfusionCounts,
    pub n_train: usize,
    pub n_test: usize,
    /// Vocabulary size of the (first) pipeline fitted on this fold's training part.
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub descriptor: String,
    pub spec: ModelSpec,
    pub k: usize,
    pub seed: u64,
    pub std_convention: String,
    pub folds: Vec<FoldResult>,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    /// Held-out class-1 probability of every example, in dataset order.
    pub oof_probabilities: Vec<f64>,
}

impl CvReport {
    pub fn from_folds(spec: ModelSpec, k: usize, seed: u64, folds: Vec<FoldResult>, oof: Vec<f64>) -> Self {
        let col = |f: fn(&MetricSet) -> f64| -> Vec<f64> { folds.iter().map(|r| f(&r.metrics)).collect() };
        CvReport {
            descriptor: spec.descriptor(),
            k,
            seed,
            std_convention: STD_CONVENTION.into(),
            precision: MetricSummary::of(&col(|m| m.precision)),
            recall: MetricSummary::of(&col(|m| m.recall)),
            f1: MetricSummary::of(&col(|m| m.f1)),
            spec,
            folds,
            oof_probabilities: oof,
        }
    }
}

/// Fits the whole pipeline on each training part (fold `f` uses seed
/// `seed + f`) and scores the held-out part. Folds run in parallel.
pub fn cross_validate(spec: &ModelSpec, data: &Dataset, lex: &LexiconSet, k: usize, seed: u64) -> Result<CvReport> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Data("cross-validation needs a labeled dataset".into()))?;
    let assignment = stratified_kfold(&labels, k, seed)?;
    let texts = data.texts();
    let results: Vec<(FoldResult, Vec<usize>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (train, test) = assignment.split(fold);
            let pick = |idx: &[usize]| -> (Vec<&str>, Vec<u8>) { idx.iter().map(|&i| (texts[i], labels[i])).unzip() };
            let (tr_x, tr_y) = pick(&train);
            let (te_x, te_y) = pick(&test);
            let run = || -> Result<_> {
                let model = spec.fit(lex, &tr_x, &tr_y, crate::seed::derive(seed, fold))?;
                let (pred, probs) = model.predict(&te_x)?;
                let counts = confusion(&te_y, &pred)?;
                Ok((model.primary().vocabulary.len(), counts, probs))
            };
            let (vocab_size, counts, probs) = run().map_err(|e| Error::Fold {
                fold,
                source: Box::new(e),
            })?;
            let result = FoldResult {
                fold,
                metrics: metrics(&counts),
                counts,
                n_train: train.len(),
                n_test: test.len(),
                vocab_size,
            };
            Ok((result, test, probs))
        })
        .collect::<Result<_>>()?;
    let mut oof = vec![f64::NAN; data.len()];
    let mut folds = Vec::with_capacity(k);
    for (result, test, probs) in results {
        for (i, p) in test.into_iter().zip(probs) {
            oof[i] = p;
        }
        folds.push(result);
    }
    Ok(CvReport::from_folds(spec.clone(), k, seed, folds, oof))
}
