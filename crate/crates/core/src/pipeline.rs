//! Text-to-probability pipelines: preprocessing, vectorizer, optional LSA
//! and a classifier, fitted together on training texts only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::features::{
    self, apply_tfidf, build_vocabulary, count_vectorize, effective_rank, fit_idf, project, truncated_svd, IdfWeights,
    SvdModel, Vocabulary,
};
use crate::linalg::DenseMatrix;
use crate::models::{vote, Classifier, ClassifierSpec, FeatureMatrix, ForestParams, LogRegParams, VotingMode};
use crate::textprep::{preprocess, LexiconSet, PrepConfig, TokenList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vectorizer {
    #[serde(rename = "unigram-count")]
    Count,
    #[serde(rename = "tfidf")]
    Tfidf,
}

impl Vectorizer {
    pub fn label(self) -> &'static str {
        match self {
            Vectorizer::Count => "1-gram",
            Vectorizer::Tfidf => "TF-IDF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdSettings {
    /// Requested rank; capped at `min(rows, cols) - 1` when fitting.
    pub k: usize,
}

impl Default for SvdSettings {
    fn default() -> Self {
        SvdSettings {
            k: features::DEFAULT_SVD_RANK,
        }
    }
}

fn default_min_df() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub prep: PrepConfig,
    pub vectorizer: Vectorizer,
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    #[serde(default)]
    pub svd: Option<SvdSettings>,
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(vectorizer: Vectorizer, svd: bool, classifier: ClassifierSpec) -> Self {
        PipelineConfig {
            prep: PrepConfig::default(),
            vectorizer,
            min_df: 1,
            svd: svd.then(SvdSettings::default),
            classifier,
            seed: 0,
        }
    }

    /// Row label such as `1-gram+SVD+RF` or `TF-IDF+logreg`.
    pub fn descriptor(&self) -> String {
        let mut s = self.vectorizer.label().to_string();
        if self.svd.is_some() {
            s.push_str("+SVD");
        }
        s.push('+');
        s.push_str(self.classifier.short_name());
        s
    }

    /// Parses a row label back into a config with default hyperparameters.
    pub fn from_descriptor(desc: &str) -> Result<Self> {
        let parts: Vec<&str> = desc.trim().split('+').collect();
        let bad = || Error::InvalidArgument(format!("unrecognized config descriptor {desc:?}"));
        let (vec, rest) = parts.split_first().ok_or_else(bad)?;
        let vectorizer = match *vec {
            "1-gram" => Vectorizer::Count,
            "TF-IDF" => Vectorizer::Tfidf,
            _ => return Err(bad()),
        };
        let (svd, clf) = match rest {
            ["SVD", clf] => (true, *clf),
            [clf] => (false, *clf),
            _ => return Err(bad()),
        };
        let classifier = match clf {
            "RF" => ClassifierSpec::Forest(ForestParams::default()),
            "logreg" => ClassifierSpec::Logreg(LogRegParams::default()),
            "NB" => ClassifierSpec::NaiveBayes { alpha: 1.0 },
            "kNN" => ClassifierSpec::Knn { k_nn: 5 },
            _ => return Err(bad()),
        };
        Ok(PipelineConfig::new(vectorizer, svd, classifier))
    }

    pub fn validate(&self, lex: &LexiconSet) -> Result<()> {
        self.prep.validate(lex)?;
        if self.svd.as_ref().is_some_and(|s| s.k == 0) {
            return Err(Error::InvalidArgument("SVD rank must be at least 1".into()));
        }
        Ok(())
    }
}

/// The two shipped presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Unigram counts, LSA, random forest with 200 trees.
    TaskABest,
    /// TF-IDF and default logistic regression.
    TaskBBest,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::TaskABest, Preset::TaskBBest];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TaskABest => "taskA-best",
            Preset::TaskBBest => "taskB-best",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Preset::TaskABest => Task::A,
            Preset::TaskBBest => Task::B,
        }
    }

    pub fn config(self) -> PipelineConfig {
        match self {
            Preset::TaskABest => PipelineConfig::new(
                Vectorizer::Count,
                true,
                ClassifierSpec::Forest(ForestParams {
                    n_estimators: 200,
                    ..ForestParams::default()
                }),
            ),
            Preset::TaskBBest => PipelineConfig::new(
                Vectorizer::Tfidf,
                false,
                ClassifierSpec::Logreg(LogRegParams::default()),
            ),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {s:?}")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shift making LSA features nonnegative for classifiers that need it:
/// training column minima are subtracted and new values clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNegShift {
    pub offsets: Vec<f64>,
}

impl NonNegShift {
    fn fit(m: &DenseMatrix) -> Self {
        let offsets = (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| m[(i, j)]).fold(0.0f64, f64::min))
            .collect();
        NonNegShift { offsets }
    }

    fn apply(&self, m: &mut DenseMatrix) {
        for i in 0..m.rows() {
            for (v, off) in m.row_mut(i).iter_mut().zip(&self.offsets) {
                *v = (*v - off).max(0.0);
            }
        }
    }
}

/// A pipeline fitted on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub config: PipelineConfig,
    pub lexicon: LexiconSet,
    pub vocabulary: Vocabulary,
    pub idf: Option<IdfWeights>,
    pub svd: Option<SvdModel>,
    pub shift: Option<NonNegShift>,
    pub classifier: Classifier,
}

pub fn tokenize_all<S: AsRef<str>>(texts: &[S], lex: &LexiconSet, prep: &PrepConfig) -> Result<Vec<TokenList>> {
    texts.iter().map(|t| preprocess(t.as_ref(), lex, prep)).collect()
}

impl FittedPipeline {
    pub fn fit<S: AsRef<str>>(
        config: &PipelineConfig,
        lexicon: &LexiconSet,
        texts: &[S],
        labels: &[u8],
    ) -> Result<Self> {
        config.validate(lexicon)?;
        if texts.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: texts.len(),
                actual: labels.len(),
            });
        }
        let tokens = tokenize_all(texts, lexicon, &config.prep)?;
        let vocabulary = build_vocabulary(&tokens, config.min_df)?;
        let counts = count_vectorize(&tokens, &vocabulary)?;
        let (weighted, idf) = match config.vectorizer {
            Vectorizer::Count => (counts, None),
            Vectorizer::Tfidf => {
                let idf = fit_idf(&counts);
                (apply_tfidf(&counts, &idf)?, Some(idf))
            }
        };
        let (features, svd, shift) = match &config.svd {
            None => (FeatureMatrix::Sparse(weighted), None, None),
            Some(s) => {
                let k = effective_rank(s.k, weighted.n_rows(), weighted.n_cols());
                let model = truncated_svd(&weighted, k, config.seed)?;
                let mut dense = project(&model, &weighted)?;
                let shift = config
                    .classifier
                    .requires_nonnegative()
                    .then(|| NonNegShift::fit(&dense));
                if let Some(sh) = &shift {
                    sh.apply(&mut dense);
                }
                (FeatureMatrix::Dense(dense), Some(model), shift)
            }
        };
        let spec = match config.classifier {
            ClassifierSpec::Knn { k_nn } => ClassifierSpec::Knn {
                k_nn: k_nn.min(labels.len()),
            },
            ref other => other.clone(),
        };
        let classifier = spec.fit(&features, labels, config.seed)?;
        Ok(FittedPipeline {
            config: config.clone(),
            lexicon: lexicon.clone(),
            vocabulary,
            idf,
            svd: svd.map(|mut m| {
                m.left_vectors = None;
                m
            }),
            shift,
            classifier,
        })
    }

    /// Features for new texts, up to and including LSA (before any shift).
    pub fn embed<S: AsRef<str>>(&self, texts: &[S]) -> Result<FeatureMatrix> {
        let tokens = tokenize_all(texts, &self.lexicon, &self.config.prep)?;
        let counts = count_vectorize(&tokens, &self.vocabulary)?;
        let weighted = match &self.idf {
            Some(idf) => apply_tfidf(&counts, idf)?,
            None => counts,
        };
        Ok(match &self.svd {
            Some(model) => FeatureMatrix::Dense(project(model, &weighted)?),
            None => FeatureMatrix::Sparse(weighted),
        })
    }

    pub fn transform<S: AsRef<str>>(&self, texts: &[S]) -> Result<FeatureMatrix> {
        let mut x = self.embed(texts)?;
        if let (Some(shift), FeatureMatrix::Dense(m)) = (&self.shift, &mut x) {
            shift.apply(m);
        }
        Ok(x)
    }

    pub fn predict_proba<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<f64>> {
        self.classifier.predict_proba(&self.transform(texts)?)
    }
}

/// What to fit: one pipeline or a voting ensemble of pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Single(PipelineConfig),
    Ensemble {
        members: Vec<PipelineConfig>,
        mode: VotingMode,
    },
}

impl ModelSpec {
    pub fn descriptor(&self) -> String {
        match self {
            ModelSpec::Single(c) => c.descriptor(),
            ModelSpec::Ensemble { mode, .. } => match mode {
                VotingMode::Hard => "Ens(hard)".into(),
                VotingMode::Soft => "Ens(soft)".into(),
            },
        }
    }

    /// Fits with every member seed replaced by `seed`.
    pub fn fit<S: AsRef<str>>(&self, lex: &LexiconSet, texts: &[S], labels: &[u8], seed: u64) -> Result<Model> {
        let with_seed = |c: &PipelineConfig| PipelineConfig { seed, ..c.clone() };
        match self {
            ModelSpec::Single(c) => Ok(Model::Single(FittedPipeline::fit(&with_seed(c), lex, texts, labels)?)),
            ModelSpec::Ensemble { members, mode } => {
                if members.len() < 2 {
                    return Err(Error::InvalidArgument("an ensemble needs at least two members".into()));
                }
                let fitted = members
                    .iter()
                    .map(|c| FittedPipeline::fit(&with_seed(c), lex, texts, labels))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Ensemble {
                    members: fitted,
                    mode: *mode,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Single(FittedPipeline),
    Ensemble {
        members: Vec<FittedPipeline>,
        mode: VotingMode,
    },
}

impl Model {
    /// Labels and class-1 probabilities for `texts`.
    pub fn predict<S: AsRef<str>>(&self, texts: &[S]) -> Result<(Vec<u8>, Vec<f64>)> {
        match self {
            Model::Single(p) => {
                let probs = p.predict_proba(texts)?;
                Ok((crate::models::threshold(&probs), probs))
            }
            Model::Ensemble { members, mode } => {
                let probs = members
                    .iter()
                    .map(|m| m.predict_proba(texts))
                    .collect::<Result<Vec<_>>>()?;
                vote(&probs, *mode)
            }
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Model::Single(p) => p.config.descriptor(),
            Model::Ensemble { members, mode } => ModelSpec::Ensemble {
                members: members.iter().map(|m| m.config.clone()).collect(),
                mode: *mode,
            }
            .descriptor(),
        }
    }

    /// Pipeline whose features feed analysis plots: the single pipeline, or
    /// the first ensemble member.
    pub fn primary(&self) -> &FittedPipeline {
        match self {
            Model::Single(p) => p,
            Model::Ensemble { members, .. } => &members[0],
        }
    }
}
