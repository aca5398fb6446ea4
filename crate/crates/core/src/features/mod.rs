//! Document-term features: vocabulary, counts, TF-IDF and LSA.

mod sparse;
mod svd;
mod tfidf;
mod vocab;

pub use sparse::SparseMatrix;
pub use svd::{
    project, truncated_svd, truncated_svd_with, SvdMethod, SvdModel, DENSE_LIMIT, OVERSAMPLING, POWER_ITERATIONS,
};
pub use tfidf::{apply_tfidf, fit_idf, IdfWeights};
pub use vocab::{build_vocabulary, count_vectorize, Vocabulary};

/// Default LSA rank before capping.
pub const DEFAULT_SVD_RANK: usize = 100;

/// Rank actually used for a matrix of the given shape: `requested`, capped
/// at `min(rows, cols) - 1` and floored at 1.
pub fn effective_rank(requested: usize, rows: usize, cols: usize) -> usize {
    requested.min(rows.min(cols).saturating_sub(1)).max(1)
}
