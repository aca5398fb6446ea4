//! Scoring of free-text short answers as correct or incorrect.
//!
//! The crate covers the whole modelling workflow:
//!
//! - [`corpus`]: CSV datasets, label-correction overlays, summary statistics.
//! - [`textprep`]: tokenization, slang normalization, typo correction,
//!   lemmatization and stopword removal.
//! - [`features`]: vocabulary, count and TF-IDF matrices, truncated SVD (LSA).
//! - [`models`]: logistic regression, random forest, naive Bayes, k-NN and
//!   voting ensembles behind one probability contract.
//! - [`eval`]: metrics, stratified k-fold cross-validation, reports and
//!   mean-minus-std model selection.
//! - [`tune`]: random search and Tree-structured Parzen Estimator search.
//! - [`viz`]: exact t-SNE, probability histograms and uncertainty bands.
//! - [`pipeline`] and [`persist`]: end-to-end pipelines and the model file.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod models;
pub mod persist;
pub mod pipeline;
pub mod seed;
pub mod textprep;
pub mod tune;
pub mod viz;

pub use error::{Error, Result};
