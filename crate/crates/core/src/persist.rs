//! Model files: one JSON document holding a fitted model, the fingerprint
//! of its training data and a SHA-256 checksum of the payload.
//!
//! Every floating-point array is stored as little-endian `f64` bytes in
//! base64 next to its shape, so loading reproduces the exact bits.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{IdfWeights, SvdModel, Vocabulary};
use crate::linalg::DenseMatrix;
use crate::models::{Classifier, DecisionTree, ForestModel, KnnModel, LogRegModel, NaiveBayesModel, VotingMode};
use crate::pipeline::{FittedPipeline, Model, NonNegShift, PipelineConfig};
use crate::textprep::LexiconSet;

pub const FORMAT_VERSION: u32 = 1;

/// Packed `f64` array; `shape` multiplies out to the element count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packed {
    pub shape: Vec<usize>,
    pub data: String,
}

impl Packed {
    pub fn new(shape: Vec<usize>, values: &[f64]) -> Self {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        Packed {
            shape,
            data: STANDARD.encode(bytes),
        }
    }

    pub fn vector(values: &[f64]) -> Self {
        Packed::new(vec![values.len()], values)
    }

    pub fn matrix(m: &DenseMatrix) -> Self {
        Packed::new(vec![m.rows(), m.cols()], m.as_slice())
    }

    pub fn unpack(&self) -> Result<Vec<f64>> {
        let bytes = STANDARD
            .decode(&self.data)
            .map_err(|e| Error::Corrupted(format!("bad base64 array: {e}")))?;
        let expected: usize = self.shape.iter().product();
        if bytes.len() != expected * 8 {
            return Err(Error::Corrupted(format!(
                "array of shape {:?} holds {} bytes",
                self.shape,
                bytes.len()
            )));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }

    fn unpack_vector(&self, len: Option<usize>) -> Result<Vec<f64>> {
        match (self.shape.as_slice(), len) {
            ([n], Some(l)) if *n != l => Err(Error::DimensionMismatch {
                expected: l,
                actual: *n,
            }),
            ([_], _) => self.unpack(),
            _ => Err(Error::Corrupted(format!(
                "expected a vector, got shape {:?}",
                self.shape
            ))),
        }
    }

    fn unpack_matrix(&self) -> Result<DenseMatrix> {
        match self.shape.as_slice() {
            [r, c] => DenseMatrix::from_vec(*r, *c, self.unpack()?),
            _ => Err(Error::Corrupted(format!(
                "expected a matrix, got shape {:?}",
                self.shape
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ClassifierRecord {
    Logreg {
        weights: Packed,
        intercept: Packed,
        c_reg: f64,
        converged: bool,
        n_iters: usize,
    },
    Forest {
        trees: Vec<DecisionTree>,
        tree_seeds: Vec<u64>,
        max_features: usize,
        n_features: usize,
    },
    NaiveBayes {
        alpha: f64,
        class_log_prior: Packed,
        feature_log_prob: Packed,
    },
    Knn {
        k_nn: usize,
        train: Packed,
        labels: Vec<u8>,
    },
}

impl ClassifierRecord {
    fn from_model(c: &Classifier) -> Self {
        match c {
            Classifier::Logreg(m) => ClassifierRecord::Logreg {
                weights: Packed::vector(&m.weights),
                intercept: Packed::vector(&[m.intercept]),
                c_reg: m.c_reg,
                converged: m.converged,
                n_iters: m.n_iters,
            },
            Classifier::Forest(m) => ClassifierRecord::Forest {
                trees: m.trees.clone(),
                tree_seeds: m.tree_seeds.clone(),
                max_features: m.max_features,
                n_features: m.n_features,
            },
            Classifier::NaiveBayes(m) => {
                let d = m.n_features();
                let flat: Vec<f64> = m.feature_log_prob.iter().flatten().copied().collect();
                ClassifierRecord::NaiveBayes {
                    alpha: m.alpha,
                    class_log_prior: Packed::vector(&m.class_log_prior),
                    feature_log_prob: Packed::new(vec![2, d], &flat),
                }
            }
            Classifier::Knn(m) => ClassifierRecord::Knn {
                k_nn: m.k_nn,
                train: Packed::matrix(&m.train),
                labels: m.labels.clone(),
            },
        }
    }

    fn into_model(self) -> Result<Classifier> {
        Ok(match self {
            ClassifierRecord::Logreg {
                weights,
                intercept,
                c_reg,
                converged,
                n_iters,
            } => Classifier::Logreg(LogRegModel {
                weights: weights.unpack_vector(None)?,
                intercept: intercept.unpack_vector(Some(1))?[0],
                c_reg,
                converged,
                n_iters,
            }),
            ClassifierRecord::Forest {
                trees,
                tree_seeds,
                max_features,
                n_features,
            } => {
                if trees.is_empty() || trees.len() != tree_seeds.len() {
                    return Err(Error::Corrupted("forest trees and seeds disagree".into()));
                }
                for t in &trees {
                    t.validate(n_features)?;
                }
                Classifier::Forest(ForestModel {
                    trees,
                    tree_seeds,
                    max_features,
                    n_features,
                })
            }
            ClassifierRecord::NaiveBayes {
                alpha,
                class_log_prior,
                feature_log_prob,
            } => {
                let prior = class_log_prior.unpack_vector(Some(2))?;
                let m = feature_log_prob.unpack_matrix()?;
                if m.rows() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        actual: m.rows(),
                    });
                }
                Classifier::NaiveBayes(NaiveBayesModel {
                    alpha,
                    class_log_prior: [prior[0], prior[1]],
                    feature_log_prob: [m.row(0).to_vec(), m.row(1).to_vec()],
                })
            }
            ClassifierRecord::Knn { k_nn, train, labels } => {
                let train = train.unpack_matrix()?;
                if labels.len() != train.rows() || k_nn == 0 || k_nn > labels.len() {
                    return Err(Error::Corrupted("kNN labels, rows and k disagree".into()));
                }
                Classifier::Knn(KnnModel { k_nn, train, labels })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SvdRecord {
    k: usize,
    singular_values: Packed,
    right_vectors: Packed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PipelineRecord {
    config: PipelineConfig,
    lexicon: LexiconSet,
    vocabulary: Vocabulary,
    idf: Option<Packed>,
    idf_n_docs: Option<usize>,
    svd: Option<SvdRecord>,
    shift: Option<Packed>,
    classifier: ClassifierRecord,
}

impl PipelineRecord {
    fn from_pipeline(p: &FittedPipeline) -> Self {
        PipelineRecord {
            config: p.config.clone(),
            lexicon: p.lexicon.clone(),
            vocabulary: p.vocabulary.clone(),
            idf: p.idf.as_ref().map(|w| Packed::vector(&w.idf)),
            idf_n_docs: p.idf.as_ref().map(|w| w.n_docs_fitted),
            svd: p.svd.as_ref().map(|s| SvdRecord {
                k: s.k,
                singular_values: Packed::vector(&s.singular_values),
                right_vectors: Packed::matrix(&s.right_vectors),
            }),
            shift: p.shift.as_ref().map(|s| Packed::vector(&s.offsets)),
            classifier: ClassifierRecord::from_model(&p.classifier),
        }
    }

    /// Rebuilds the pipeline, checking that the stages chain dimensionally.
    fn into_pipeline(self) -> Result<FittedPipeline> {
        let v = self.vocabulary.len();
        let idf = match (self.idf, self.idf_n_docs) {
            (Some(p), Some(n)) => Some(IdfWeights {
                idf: p.unpack_vector(Some(v))?,
                n_docs_fitted: n,
            }),
            (None, None) => None,
            _ => return Err(Error::Corrupted("idf weights without document count".into())),
        };
        let svd = match self.svd {
            Some(r) => {
                let right = r.right_vectors.unpack_matrix()?;
                if right.rows() != v || right.cols() != r.k {
                    return Err(Error::DimensionMismatch {
                        expected: v,
                        actual: right.rows(),
                    });
                }
                Some(SvdModel {
                    k: r.k,
                    singular_values: r.singular_values.unpack_vector(Some(r.k))?,
                    right_vectors: right,
                    left_vectors: None,
                })
            }
            None => None,
        };
        let width = svd.as_ref().map_or(v, |s| s.k);
        let shift = match self.shift {
            Some(p) => Some(NonNegShift {
                offsets: p.unpack_vector(Some(width))?,
            }),
            None => None,
        };
        let classifier = self.classifier.into_model()?;
        if classifier.n_features() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: classifier.n_features(),
            });
        }
        Ok(FittedPipeline {
            config: self.config,
            lexicon: self.lexicon,
            vocabulary: self.vocabulary,
            idf,
            svd,
            shift,
            classifier,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelRecord {
    Single {
        pipeline: PipelineRecord,
    },
    Ensemble {
        mode: VotingMode,
        members: Vec<PipelineRecord>,
    },
}

/// Metadata stored beside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// SHA-256 of the training data as used (labels after any overlay).
    pub fingerprint: String,
    pub task: Option<String>,
    pub n_train: usize,
    #[serde(default)]
    pub overlay_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    checksum: String,
    payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Payload {
    meta: ModelMeta,
    model: ModelRecord,
}

fn checksum(payload: &serde_json::Value) -> String {
    // serde_json::Value keeps object keys sorted, so this text is canonical
    let text = serde_json::to_string(payload).expect("serializable");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn model_to_json(model: &Model, meta: &ModelMeta) -> String {
    let record = match model {
        Model::Single(p) => ModelRecord::Single {
            pipeline: PipelineRecord::from_pipeline(p),
        },
        Model::Ensemble { members, mode } => ModelRecord::Ensemble {
            mode: *mode,
            members: members.iter().map(PipelineRecord::from_pipeline).collect(),
        },
    };
    let payload = serde_json::to_value(Payload {
        meta: meta.clone(),
        model: record,
    })
    .expect("serializable");
    let env = Envelope {
        format_version: FORMAT_VERSION,
        checksum: checksum(&payload),
        payload,
    };
    serde_json::to_string_pretty(&env).expect("serializable")
}

pub fn model_from_json(text: &str) -> Result<(Model, ModelMeta)> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Corrupted(format!("not a model file: {e}")))?;
    let version = raw.get("format_version").and_then(serde_json::Value::as_u64);
    match version {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::Version {
                found: v as u32,
                expected: FORMAT_VERSION,
            })
        }
        None => return Err(Error::Corrupted("missing format_version".into())),
    }
    let env: Envelope = serde_json::from_value(raw).map_err(|e| Error::Corrupted(e.to_string()))?;
    if checksum(&env.payload) != env.checksum {
        return Err(Error::Corrupted("checksum mismatch".into()));
    }
    let payload: Payload = serde_json::from_value(env.payload).map_err(|e| Error::Corrupted(e.to_string()))?;
    let model = match payload.model {
        ModelRecord::Single { pipeline } => Model::Single(pipeline.into_pipeline()?),
        ModelRecord::Ensemble { mode, members } => {
            if members.len() < 2 {
                return Err(Error::Corrupted("ensemble with fewer than two members".into()));
            }
            Model::Ensemble {
                mode,
                members: members
                    .into_iter()
                    .map(PipelineRecord::into_pipeline)
                    .collect::<Result<_>>()?,
            }
        }
    };
    Ok((model, payload.meta))
}

pub fn save_model(model: &Model, meta: &ModelMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model, meta)).map_err(|e| Error::io(path, e))
}

/// Loads a model; with `expect_fingerprint` set, a different training-data
/// fingerprint is an error.
pub fn load_model(path: impl AsRef<Path>, expect_fingerprint: Option<&str>) -> Result<(Model, ModelMeta)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (model, meta) = model_from_json(&text)?;
    if let Some(expected) = expect_fingerprint {
        if meta.fingerprint != expected {
            return Err(Error::Fingerprint {
                found: meta.fingerprint,
                expected: expected.to_string(),
            });
        }
    }
    Ok((model, meta))
}
