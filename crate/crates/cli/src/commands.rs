use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ansgrade::corpus::{apply_overlay, load_dataset, load_overlay, Dataset, Split, Task};
use ansgrade::eval::{cross_validate, render_table, select_pessimistic, write_report_csv, CvReport};
use ansgrade::features::{effective_rank, project, truncated_svd};
use ansgrade::models::{FeatureMatrix, VotingMode};
use ansgrade::persist::{load_model, save_model, ModelMeta};
use ansgrade::pipeline::{ModelSpec, PipelineConfig, Preset};
use ansgrade::textprep::LexiconSet;
use ansgrade::tune::{
    build_pipeline_space, config_to_pipeline, ensemble_from_trials, optimize_logged, TpeParams, TrialStatus,
};
use ansgrade::viz::{
    deduplicate, histogram_svg, probability_histogram, scatter_svg, tsne, uncertainty_band_count, write_embedding_csv,
    write_histogram_csv, TsneConfig,
};
use ansgrade::{Error, Result};

use crate::{DataArgs, ModeArg};

/// Rank of the LSA step `analyze` adds before t-SNE when the model has none.
const ANALYZE_SVD_RANK: usize = 50;

fn lexicon(args: &DataArgs) -> Result<LexiconSet> {
    match &args.lexicon_dir {
        Some(dir) => LexiconSet::load_dir(dir),
        None => Ok(LexiconSet::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Loads the training split and applies the overlay when given.
fn training_data(task: Task, args: &DataArgs, overlay: Option<&Path>) -> Result<(Dataset, Option<Dataset>)> {
    let data = load_dataset(&args.data, task, Split::Train)?;
    let updated = match overlay {
        Some(p) => {
            let (updated, summary) = apply_overlay(&data, &load_overlay(p)?)?;
            log::info!(
                "overlay: {} labels 0->1, {} labels 1->0",
                summary.zero_to_one,
                summary.one_to_zero
            );
            Some(updated)
        }
        None => None,
    };
    Ok((data, updated))
}

/// Preset name, config descriptor, or a JSON file holding a model spec or
/// a single pipeline config.
fn resolve_spec(text: &str, task: Option<Task>) -> Result<ModelSpec> {
    if let Ok(preset) = text.parse::<Preset>() {
        if let Some(t) = task {
            if preset.task() != t {
                return Err(Error::InvalidArgument(format!(
                    "preset {preset} is for task {}, not task {t}",
                    preset.task()
                )));
            }
        }
        return Ok(ModelSpec::Single(preset.config()));
    }
    if let Ok(cfg) = PipelineConfig::from_descriptor(text) {
        return Ok(ModelSpec::Single(cfg));
    }
    let path = Path::new(text);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "{text:?} is neither a preset, a config descriptor nor an existing file"
        )));
    }
    let body = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{text}: {e}")))?;
    if let Ok(spec) = serde_json::from_str::<ModelSpec>(&body) {
        return Ok(spec);
    }
    serde_json::from_str::<PipelineConfig>(&body)
        .map(ModelSpec::Single)
        .map_err(|e| Error::InvalidArgument(format!("{text}: not a config file: {e}")))
}

pub fn train(task: Task, args: &DataArgs, config: &str, overlay: Option<&Path>, out: &Path, seed: u64) -> Result<()> {
    let spec = resolve_spec(config, Some(task))?;
    let lex = lexicon(args)?;
    let (data, updated) = training_data(task, args, overlay)?;
    let train = updated.as_ref().unwrap_or(&data);
    let labels = train.labels().expect("training split is labeled");
    let model = spec.fit(&lex, &train.texts(), &labels, seed)?;
    let meta = ModelMeta {
        fingerprint: train.fingerprint(),
        task: Some(task.to_string()),
        n_train: train.len(),
        overlay_applied: updated.is_some(),
    };
    save_model(&model, &meta, out)?;
    println!("model {} trained on {} rows", model.descriptor(), train.len());
    println!("fingerprint {}", meta.fingerprint);
    Ok(())
}

fn read_config_list(path: &Path) -> Result<Vec<ModelSpec>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let specs = body
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| resolve_spec(l, None))
        .collect::<Result<Vec<_>>>()?;
    if specs.is_empty() {
        return Err(Error::InvalidArgument(format!("{} lists no configs", path.display())));
    }
    Ok(specs)
}

fn print_selection(reports: &[CvReport]) {
    if let Some(best) = select_pessimistic(reports) {
        println!(
            "selected by mean F1 minus one std: {} ({:.3})",
            best.descriptor,
            best.f1.mean - best.f1.std
        );
    }
}

pub fn cv(
    task: Task,
    args: &DataArgs,
    configs: &Path,
    k: usize,
    seed: u64,
    overlay: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let specs = read_config_list(configs)?;
    let lex = lexicon(args)?;
    let (data, updated) = training_data(task, args, overlay)?;
    let data = updated.as_ref().unwrap_or(&data);
    let reports = specs
        .iter()
        .map(|s| {
            log::info!("cross-validating {}", s.descriptor());
            cross_validate(s, data, &lex, k, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", render_table(&reports));
    print_selection(&reports);
    if let Some(path) = out {
        write_report_csv(&reports, create(path)?)?;
    }
    Ok(())
}

pub struct TuneArgs<'a> {
    pub task: Task,
    pub data: &'a DataArgs,
    pub trials: usize,
    pub seed: u64,
    pub log: &'a Path,
    pub k: usize,
    pub overlay: Option<&'a Path>,
    pub out_config: Option<&'a Path>,
    pub ensemble: Option<ModeArg>,
}

pub fn tune(a: TuneArgs<'_>) -> Result<()> {
    let lex = lexicon(a.data)?;
    let (data, updated) = training_data(a.task, a.data, a.overlay)?;
    let mut space = build_pipeline_space();
    if lex.reference_vocab().is_empty() {
        log::warn!("no reference vocabulary: typo correction pinned off");
        space.fix_choice("use_typo_correction", "false")?;
    }
    if updated.is_none() {
        space.fix_choice("use_label_overlay", "false")?;
    }
    let objective = |config: &ansgrade::tune::Config, trial_seed: u64| -> Result<f64> {
        let choice = config_to_pipeline(config)?;
        let set = if choice.use_label_overlay {
            updated.as_ref().unwrap_or(&data)
        } else {
            &data
        };
        let report = cross_validate(&ModelSpec::Single(choice.pipeline), set, &lex, a.k, trial_seed)?;
        Ok(report.f1.mean)
    };
    let trials = optimize_logged(objective, &space, a.trials, &TpeParams::default(), a.seed, a.log)?;
    let n_failed = trials.iter().filter(|t| t.status == TrialStatus::Failed).count();
    let best = trials
        .first()
        .filter(|t| t.status == TrialStatus::Ok)
        .ok_or_else(|| Error::Numeric(format!("all {} trials failed", trials.len())))?;
    println!(
        "best trial {} of {} ({} failed): mean F1 {:.4}",
        best.index,
        trials.len(),
        n_failed,
        best.objective.unwrap_or(f64::NAN)
    );
    let choice = config_to_pipeline(&best.config)?;
    let best_json = serde_json::json!({
        "pipeline": choice.pipeline,
        "use_label_overlay": choice.use_label_overlay,
        "search_point": best.config,
    });
    let best_text = serde_json::to_string_pretty(&best_json).expect("serializable");
    println!("{best_text}");
    if let Some(path) = a.out_config {
        write_all(path, &(best_text + "\n"))?;
    }
    let set = if choice.use_label_overlay {
        updated.as_ref().unwrap_or(&data)
    } else {
        &data
    };
    let mut reports = vec![cross_validate(
        &ModelSpec::Single(choice.pipeline),
        set,
        &lex,
        a.k,
        best.seed,
    )?];
    if let Some(mode) = a.ensemble {
        let mode = match mode {
            ModeArg::Hard => VotingMode::Hard,
            ModeArg::Soft => VotingMode::Soft,
        };
        match ensemble_from_trials(&trials, mode) {
            Ok(spec) => {
                reports.push(cross_validate(&spec, &data, &lex, a.k, a.seed)?);
                if let Some(up) = &updated {
                    let mut r = cross_validate(&spec, up, &lex, a.k, a.seed)?;
                    r.descriptor.push_str(" overlay");
                    reports.push(r);
                }
            }
            Err(e) => log::warn!("no ensemble: {e}"),
        }
    }
    print!("{}", render_table(&reports));
    Ok(())
}

fn load_for_inference(model: &Path, data: &Path, expect: Option<&str>) -> Result<(ansgrade::pipeline::Model, Dataset)> {
    let (model, meta) = load_model(model, expect)?;
    let task = match meta.task.as_deref() {
        Some(t) => t.parse()?,
        None => Task::A,
    };
    let dataset = load_dataset(data, task, Split::Test)?;
    Ok((model, dataset))
}

pub fn predict(model: &Path, data: &Path, out: &Path, expect: Option<&str>) -> Result<()> {
    let (model, dataset) = load_for_inference(model, data, expect)?;
    let (labels, probs) = model.predict(&dataset.texts())?;
    let mut w = create(out)?;
    let io = |e: std::io::Error| Error::Data(format!("{}: {e}", out.display()));
    writeln!(w, "id,label,probability").map_err(io)?;
    for ((r, l), p) in dataset.responses().iter().zip(&labels).zip(&probs) {
        writeln!(w, "{},{l},{p}", csv_field(&r.id)).map_err(io)?;
    }
    w.flush().map_err(io)?;
    println!("{} predictions written to {}", labels.len(), out.display());
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct AnalyzeArgs<'a> {
    pub model: &'a Path,
    pub data: &'a Path,
    pub out_dir: &'a Path,
    pub perplexity: f64,
    pub iters: usize,
    pub bins: usize,
    pub seed: u64,
    pub expect_fingerprint: Option<&'a str>,
}

pub fn analyze(a: AnalyzeArgs<'_>) -> Result<()> {
    let (model, dataset) = load_for_inference(a.model, a.data, a.expect_fingerprint)?;
    std::fs::create_dir_all(a.out_dir).map_err(|e| Error::Data(format!("{}: {e}", a.out_dir.display())))?;
    let texts = dataset.texts();
    let labels = dataset.labels();
    let (_, probs) = model.predict(&texts)?;

    let hist = probability_histogram(&probs, a.bins, labels.as_deref())?;
    write_histogram_csv(&hist, create(&a.out_dir.join("histogram.csv"))?)?;
    write_all(
        &a.out_dir.join("histogram.svg"),
        &histogram_svg(&hist, "Predicted probability of class 1"),
    )?;

    let band = uncertainty_band_count(&probs, 0.4, 0.6)?;
    write_all(
        &a.out_dir.join("band.json"),
        &(serde_json::to_string_pretty(&band).expect("serializable") + "\n"),
    )?;
    match band.fraction {
        Some(f) => println!("{} of {} predictions in [0.4, 0.6] ({:.3})", band.count, band.total, f),
        None => println!("no predictions"),
    }

    let features = match model.primary().embed(&texts)? {
        FeatureMatrix::Dense(m) => m,
        FeatureMatrix::Sparse(s) => {
            let k = effective_rank(ANALYZE_SVD_RANK, s.n_rows(), s.n_cols());
            log::info!("model has no LSA step; reducing to {k} dimensions before t-SNE");
            project(&truncated_svd(&s, k, a.seed)?, &s)?
        }
    };
    let n_unique = deduplicate(&features).0.rows();
    let mut perplexity = a.perplexity;
    if perplexity >= n_unique as f64 - 1.0 {
        perplexity = ((n_unique as f64 - 1.0) / 3.0).max(1.5);
        log::warn!(
            "perplexity {} is too large for {n_unique} distinct points; using {perplexity}",
            a.perplexity
        );
    }
    let config = TsneConfig {
        perplexity,
        n_iters: a.iters,
        seed: a.seed,
        ..TsneConfig::default()
    };
    let emb = tsne(&features, &config)?;
    if emb.n_unique < features.rows() {
        println!(
            "t-SNE: {} duplicate rows merged into {} distinct points",
            features.rows() - emb.n_unique,
            emb.n_unique
        );
    }
    let ids: Vec<&str> = dataset.responses().iter().map(|r| r.id.as_str()).collect();
    write_embedding_csv(&ids, &emb, labels.as_deref(), create(&a.out_dir.join("tsne.csv"))?)?;
    write_all(
        &a.out_dir.join("tsne.svg"),
        &scatter_svg(&emb, labels.as_deref(), "t-SNE of document features"),
    )?;
    println!("t-SNE KL divergence {:.4}; outputs in {}", emb.kl, a.out_dir.display());
    Ok(())
}
