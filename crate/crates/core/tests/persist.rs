mod common;

use ansgrade::models::{ClassifierSpec, ForestParams, LogRegParams, VotingMode};
use ansgrade::persist::{load_model, model_from_json, model_to_json, save_model, ModelMeta, FORMAT_VERSION};
use ansgrade::pipeline::{Model, ModelSpec, PipelineConfig, SvdSettings, Vectorizer};
use ansgrade::textprep::{LexiconSet, PrepConfig};
use ansgrade::Error;

fn meta() -> ModelMeta {
    ModelMeta {
        fingerprint: "f".repeat(64),
        task: Some("A".into()),
        n_train: 120,
        overlay_applied: false,
    }
}

fn lexicon() -> LexiconSet {
    LexiconSet::new(
        [("gk", "tidak"), ("yg", "yang")],
        [("melawan", "lawan"), ("kuman", "kuma")],
        ["yang", "dan"],
        ["imun", "antibodi", "virus", "hujan", "banjir", "sungai"],
    )
    .unwrap()
}

fn families() -> Vec<ClassifierSpec> {
    vec![
        ClassifierSpec::Logreg(LogRegParams {
            c_reg: 3.0,
            ..LogRegParams::default()
        }),
        ClassifierSpec::Forest(ForestParams {
            n_estimators: 25,
            ..ForestParams::default()
        }),
        ClassifierSpec::NaiveBayes { alpha: 0.5 },
        ClassifierSpec::Knn { k_nn: 7 },
    ]
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|p| p.to_bits()).collect()
}

fn assert_round_trip(model: &Model) {
    let inputs = common::random_texts(100, 77);
    let (labels, probs) = model.predict(&inputs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(model, &meta(), &path).unwrap();
    let (loaded, m) = load_model(&path, Some(&"f".repeat(64))).unwrap();
    assert_eq!(m, meta());
    assert_eq!(loaded.descriptor(), model.descriptor());
    let (labels2, probs2) = loaded.predict(&inputs).unwrap();
    assert_eq!(labels, labels2);
    assert_eq!(bits(&probs), bits(&probs2));
    assert_eq!(model_to_json(&loaded, &m), model_to_json(model, &meta()));
}

#[test]
fn every_family_and_feature_path_round_trips() {
    let data = common::synthetic_corpus(50, 30, 0.1, 8);
    let (texts, labels) = (data.texts(), data.labels().unwrap());
    for vectorizer in [Vectorizer::Count, Vectorizer::Tfidf] {
        for svd in [false, true] {
            for classifier in families() {
                let mut cfg = PipelineConfig::new(vectorizer, svd, classifier);
                cfg.prep = PrepConfig {
                    use_slang_norm: true,
                    use_typo_correction: true,
                    use_stopword_removal: true,
                    ..PrepConfig::default()
                };
                if svd {
                    cfg.svd = Some(SvdSettings { k: 12 });
                }
                let model = ModelSpec::Single(cfg).fit(&lexicon(), &texts, &labels, 5).unwrap();
                assert_round_trip(&model);
            }
        }
    }
}

#[test]
fn large_forest_round_trips() {
    let data = common::synthetic_corpus(80, 40, 0.1, 9);
    let cfg = PipelineConfig::new(
        Vectorizer::Count,
        true,
        ClassifierSpec::Forest(ForestParams {
            n_estimators: 200,
            ..ForestParams::default()
        }),
    );
    let model = ModelSpec::Single(cfg)
        .fit(&LexiconSet::default(), &data.texts(), &data.labels().unwrap(), 1)
        .unwrap();
    assert_round_trip(&model);
}

#[test]
fn ensembles_round_trip_with_their_mode() {
    let data = common::synthetic_corpus(50, 30, 0.1, 10);
    for mode in [VotingMode::Hard, VotingMode::Soft] {
        let members = families()
            .into_iter()
            .map(|c| PipelineConfig::new(Vectorizer::Tfidf, false, c))
            .collect();
        let model = ModelSpec::Ensemble { members, mode }
            .fit(&LexiconSet::default(), &data.texts(), &data.labels().unwrap(), 2)
            .unwrap();
        assert_round_trip(&model);
        let (loaded, _) = model_from_json(&model_to_json(&model, &meta())).unwrap();
        assert!(matches!(loaded, Model::Ensemble { mode: m, .. } if m == mode));
    }
}

fn small_model_json() -> String {
    let data = common::synthetic_corpus(20, 10, 0.0, 11);
    let cfg = PipelineConfig::new(
        Vectorizer::Tfidf,
        false,
        ClassifierSpec::Logreg(LogRegParams::default()),
    );
    let model = ModelSpec::Single(cfg)
        .fit(&LexiconSet::default(), &data.texts(), &data.labels().unwrap(), 0)
        .unwrap();
    model_to_json(&model, &meta())
}

#[test]
fn truncation_is_reported_as_corruption() {
    let json = small_model_json();
    for cut in [0, 1, json.len() / 3, json.len() / 2, json.len() - 1] {
        let err = model_from_json(&json[..cut]).unwrap_err();
        assert!(matches!(err, Error::Corrupted(_)), "cut {cut}: {err}");
    }
}

#[test]
fn tampering_fails_the_checksum() {
    let mut value: serde_json::Value = serde_json::from_str(&small_model_json()).unwrap();
    value["payload"]["meta"]["n_train"] = serde_json::json!(121);
    let err = model_from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, Error::Corrupted(_)), "{err}");
}

#[test]
fn unknown_version_is_rejected() {
    let mut value: serde_json::Value = serde_json::from_str(&small_model_json()).unwrap();
    value["format_version"] = serde_json::json!(FORMAT_VERSION + 1);
    let err = model_from_json(&value.to_string()).unwrap_err();
    assert!(
        matches!(err, Error::Version { found, expected } if found == FORMAT_VERSION + 1 && expected == FORMAT_VERSION)
    );
}

#[test]
fn fingerprint_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, small_model_json()).unwrap();
    assert!(load_model(&path, None).is_ok());
    let err = load_model(&path, Some("abc")).unwrap_err();
    assert!(matches!(err, Error::Fingerprint { .. }));
}
