use super::space::{Condition, Config, Dimension, Domain, SearchSpace, Value};
use super::{Trial, TrialStatus};
use crate::error::{Error, Result};
use crate::models::{ClassifierSpec, ForestParams, LogRegParams, VotingMode};
use crate::pipeline::{ModelSpec, PipelineConfig, SvdSettings, Vectorizer};
use crate::textprep::PrepConfig;

/// Classifier families in the order ensembles list them.
pub const FAMILIES: [&str; 4] = ["logreg", "forest", "naive_bayes", "knn"];

fn dim(name: &str, domain: Domain) -> Dimension {
    Dimension {
        name: name.into(),
        domain,
        condition: None,
    }
}

fn under(parent: &str, value: &str, name: &str, domain: Domain) -> Dimension {
    Dimension {
        condition: Some(Condition {
            parent: parent.into(),
            value: value.into(),
        }),
        ..dim(name, domain)
    }
}

/// Preprocessing, features and the four classifier families with their
/// conditional hyperparameters.
pub fn build_pipeline_space() -> SearchSpace {
    SearchSpace::new(vec![
        dim("vectorizer", Domain::categorical(["unigram-count", "tfidf"])),
        dim("use_svd", Domain::boolean()),
        under("use_svd", "true", "svd_k", Domain::Int { lo: 10, hi: 300 }),
        dim("use_typo_correction", Domain::boolean()),
        dim("use_stopword_removal", Domain::boolean()),
        dim("use_label_overlay", Domain::boolean()),
        dim("classifier", Domain::categorical(FAMILIES)),
        under(
            "classifier",
            "logreg",
            "c_reg",
            Domain::LogUniform { lo: 1e-3, hi: 1e3 },
        ),
        under("classifier", "forest", "n_estimators", Domain::Int { lo: 50, hi: 400 }),
        under("classifier", "forest", "min_samples_leaf", Domain::Int { lo: 1, hi: 5 }),
        under(
            "classifier",
            "naive_bayes",
            "alpha",
            Domain::LogUniform { lo: 1e-2, hi: 10.0 },
        ),
        under("classifier", "knn", "k_nn", Domain::Int { lo: 1, hi: 25 }),
    ])
    .expect("static space is valid")
}

/// A point of the pipeline space decoded into a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineChoice {
    pub pipeline: PipelineConfig,
    pub use_label_overlay: bool,
}

pub fn config_to_pipeline(config: &Config) -> Result<PipelineChoice> {
    let missing = |k: &str| Error::InvalidArgument(format!("config lacks {k:?}"));
    let choice = |k: &str| config.get(k).and_then(Value::as_choice).ok_or_else(|| missing(k));
    let flag = |k: &str| choice(k).map(|v| v == "true");
    let int = |k: &str| match config.get(k) {
        Some(Value::Int(v)) if *v >= 0 => Ok(*v as usize),
        _ => Err(missing(k)),
    };
    let float = |k: &str| config.get(k).and_then(Value::as_f64).ok_or_else(|| missing(k));
    let vectorizer = match choice("vectorizer")? {
        "unigram-count" => Vectorizer::Count,
        "tfidf" => Vectorizer::Tfidf,
        other => return Err(Error::InvalidArgument(format!("unknown vectorizer {other:?}"))),
    };
    let svd = if flag("use_svd")? {
        Some(SvdSettings { k: int("svd_k")? })
    } else {
        None
    };
    let classifier = match choice("classifier")? {
        "logreg" => ClassifierSpec::Logreg(LogRegParams {
            c_reg: float("c_reg")?,
            ..LogRegParams::default()
        }),
        "forest" => ClassifierSpec::Forest(ForestParams {
            n_estimators: int("n_estimators")?,
            min_samples_leaf: int("min_samples_leaf")?,
            ..ForestParams::default()
        }),
        "naive_bayes" => ClassifierSpec::NaiveBayes { alpha: float("alpha")? },
        "knn" => ClassifierSpec::Knn { k_nn: int("k_nn")? },
        other => return Err(Error::InvalidArgument(format!("unknown classifier {other:?}"))),
    };
    Ok(PipelineChoice {
        pipeline: PipelineConfig {
            prep: PrepConfig {
                use_typo_correction: flag("use_typo_correction")?,
                use_stopword_removal: flag("use_stopword_removal")?,
                ..PrepConfig::default()
            },
            vectorizer,
            min_df: 1,
            svd,
            classifier,
            seed: 0,
        },
        use_label_overlay: flag("use_label_overlay")?,
    })
}

/// Best completed trial of each classifier family present, in family order.
pub fn best_per_family(trials: &[Trial]) -> Vec<&Trial> {
    FAMILIES
        .iter()
        .filter_map(|fam| {
            trials
                .iter()
                .filter(|t| t.status == TrialStatus::Ok)
                .filter(|t| t.config.get("classifier").and_then(Value::as_choice) == Some(fam))
                .min_by(|a, b| {
                    b.objective
                        .unwrap_or(f64::NEG_INFINITY)
                        .total_cmp(&a.objective.unwrap_or(f64::NEG_INFINITY))
                        .then(a.index.cmp(&b.index))
                })
        })
        .collect()
}

/// Voting ensemble of the per-family winners.
pub fn ensemble_from_trials(trials: &[Trial], mode: VotingMode) -> Result<ModelSpec> {
    let members = best_per_family(trials)
        .into_iter()
        .map(|t| config_to_pipeline(&t.config).map(|c| c.pipeline))
        .collect::<Result<Vec<_>>>()?;
    if members.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "an ensemble needs completed trials from at least two families, found {}",
            members.len()
        )));
    }
    Ok(ModelSpec::Ensemble { members, mode })
}
