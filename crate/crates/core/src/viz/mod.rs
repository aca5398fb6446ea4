//! Analysis outputs: t-SNE embeddings, probability histograms and the
//! uncertainty-band count, with CSV and SVG writers.

mod render;
mod tsne;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use render::{histogram_svg, scatter_svg, write_embedding_csv, write_histogram_csv};
pub use tsne::{
    calibrate_sigma, deduplicate, joint_probabilities, kl_divergence, kl_gradient, tsne, Affinities, Embedding2D,
    TsneConfig, ENTROPY_TOL, MAX_BISECTION_STEPS,
};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    /// `n_bins + 1` increasing edges from 0 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Per-class counts when labels were given.
    pub counts_pos: Option<Vec<usize>>,
    pub counts_neg: Option<Vec<usize>>,
}

/// Bin of `p` under `edges`: right-open, except the last bin is closed.
fn bin_of(p: f64, edges: &[f64]) -> usize {
    let n = edges.len() - 1;
    let mut b = ((p * n as f64).floor() as usize).min(n - 1);
    while b > 0 && p < edges[b] {
        b -= 1;
    }
    while b + 1 < n && p >= edges[b + 1] {
        b += 1;
    }
    b
}

pub fn probability_histogram(probs: &[f64], n_bins: usize, labels: Option<&[u8]>) -> Result<HistogramData> {
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be at least 1".into()));
    }
    if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("probability {bad} outside [0, 1]")));
    }
    if let Some(l) = labels {
        if l.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: probs.len(),
                actual: l.len(),
            });
        }
    }
    let edges: Vec<f64> = (0..=n_bins).map(|i| i as f64 / n_bins as f64).collect();
    let mut counts = vec![0; n_bins];
    let mut split = labels.map(|_| (vec![0; n_bins], vec![0; n_bins]));
    for (i, &p) in probs.iter().enumerate() {
        let b = bin_of(p, &edges);
        counts[b] += 1;
        if let (Some((pos, neg)), Some(l)) = (split.as_mut(), labels) {
            if l[i] == 1 {
                pos[b] += 1;
            } else {
                neg[b] += 1;
            }
        }
    }
    let (counts_pos, counts_neg) = match split {
        Some((p, n)) => (Some(p), Some(n)),
        None => (None, None),
    };
    Ok(HistogramData {
        edges,
        counts,
        counts_pos,
        counts_neg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandCount {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub total: usize,
    /// `None` for empty input.
    pub fraction: Option<f64>,
}

/// Number of probabilities in the closed band `[lo, hi]`.
pub fn uncertainty_band_count(probs: &[f64], lo: f64, hi: f64) -> Result<BandCount> {
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "band [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
        )));
    }
    let count = probs.iter().filter(|&&p| lo <= p && p <= hi).count();
    Ok(BandCount {
        lo,
        hi,
        count,
        total: probs.len(),
        fraction: (!probs.is_empty()).then(|| count as f64 / probs.len() as f64),
    })
}
