//! Hyperparameter search: prior sampling and a Tree-structured Parzen
//! Estimator over conditional search spaces, with a resumable trial log.
//!
//! Trial `t` of a search with seed `s` uses seed `s + t` both for its
//! suggestion and for the objective evaluation.

mod parzen;
mod search;
mod space;
mod tpe;

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parzen::Parzen1D;
pub use search::{best_per_family, build_pipeline_space, config_to_pipeline, ensemble_from_trials, PipelineChoice};
pub use space::{sample_random, Condition, Config, Dimension, Domain, SearchSpace, Value};
pub use tpe::{categorical_density, split_good_bad, tpe_suggest, TpeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub config: Config,
    /// Maximized; finite whenever `status` is ok.
    pub objective: Option<f64>,
    pub status: TrialStatus,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds since the Unix epoch at completion.
    #[serde(default)]
    pub timestamp: u64,
}

/// First line of a trial log; a resumed search must match it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub seed: u64,
    pub params: TpeParams,
    pub space: SearchSpace,
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn evaluate<F>(objective: &mut F, index: usize, config: Config, seed: u64) -> Trial
where
    F: FnMut(&Config, u64) -> Result<f64>,
{
    let outcome = catch_unwind(AssertUnwindSafe(|| objective(&config, seed)));
    let (objective, error) = match outcome {
        Ok(Ok(v)) if v.is_finite() => (Some(v), None),
        Ok(Ok(v)) => (None, Some(format!("non-finite objective {v}"))),
        Ok(Err(e)) => (None, Some(e.to_string())),
        Err(_) => (None, Some("objective panicked".into())),
    };
    Trial {
        index,
        status: if objective.is_some() {
            TrialStatus::Ok
        } else {
            TrialStatus::Failed
        },
        config,
        objective,
        seed,
        error,
        timestamp: now(),
    }
}

/// Best first: completed trials by objective (earlier index on ties), then
/// failed trials by index.
pub fn sort_best_first(trials: &mut [Trial]) {
    trials.sort_by(|a, b| {
        let key = |t: &Trial| t.objective.unwrap_or(f64::NEG_INFINITY);
        (b.status == TrialStatus::Ok)
            .cmp(&(a.status == TrialStatus::Ok))
            .then(key(b).total_cmp(&key(a)))
            .then(a.index.cmp(&b.index))
    });
}

fn run<F>(
    objective: &mut F,
    space: &SearchSpace,
    n_trials: usize,
    params: &TpeParams,
    seed: u64,
    mut history: Vec<Trial>,
    on_trial: &mut dyn FnMut(&Trial) -> Result<()>,
) -> Result<Vec<Trial>>
where
    F: FnMut(&Config, u64) -> Result<f64>,
{
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    params.validate()?;
    for t in history.len()..n_trials {
        let trial_seed = crate::seed::derive(seed, t);
        let config = tpe_suggest(&history, space, params, trial_seed);
        let trial = evaluate(objective, t, config, trial_seed);
        match trial.status {
            TrialStatus::Ok => log::info!("trial {t}: objective {:.4}", trial.objective.unwrap_or(f64::NAN)),
            TrialStatus::Failed => log::warn!("trial {t} failed: {}", trial.error.as_deref().unwrap_or("")),
        }
        on_trial(&trial)?;
        history.push(trial);
    }
    history.truncate(n_trials);
    sort_best_first(&mut history);
    Ok(history)
}

/// Sequential search of `n_trials` trials, returned best first. Objective
/// errors, panics and non-finite values become failed trials.
pub fn optimize<F>(
    mut objective: F,
    space: &SearchSpace,
    n_trials: usize,
    params: &TpeParams,
    seed: u64,
) -> Result<Vec<Trial>>
where
    F: FnMut(&Config, u64) -> Result<f64>,
{
    run(&mut objective, space, n_trials, params, seed, Vec::new(), &mut |_| {
        Ok(())
    })
}

/// Reads a trial log; an absent or empty file yields `None`.
pub fn read_log(path: &Path) -> Result<Option<(LogHeader, Vec<Trial>)>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut lines = BufReader::new(file).lines();
    let parse_err = |line: usize, e: serde_json::Error| Error::row(&path.display().to_string(), line, e.to_string());
    let Some(first) = lines.next() else {
        return Ok(None);
    };
    let header: LogHeader =
        serde_json::from_str(&first.map_err(|e| Error::io(path, e))?).map_err(|e| parse_err(1, e))?;
    let mut trials = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trial = serde_json::from_str(&line).map_err(|e| parse_err(i + 2, e))?;
        if t.index != trials.len() || t.seed != crate::seed::derive(header.seed, t.index) {
            return Err(Error::row(
                &path.display().to_string(),
                i + 2,
                "trial index or seed out of sequence",
            ));
        }
        trials.push(t);
    }
    Ok(Some((header, trials)))
}

/// Like [`optimize`], appending every trial to a JSON-lines log. An existing
/// log written with the same seed, parameters and space is resumed.
pub fn optimize_logged<F>(
    mut objective: F,
    space: &SearchSpace,
    n_trials: usize,
    params: &TpeParams,
    seed: u64,
    log_path: &Path,
) -> Result<Vec<Trial>>
where
    F: FnMut(&Config, u64) -> Result<f64>,
{
    let header = LogHeader {
        seed,
        params: params.clone(),
        space: space.clone(),
    };
    let history = match read_log(log_path)? {
        Some((found, trials)) => {
            if found != header {
                return Err(Error::InvalidArgument(format!(
                    "{} was written by a search with a different seed, parameters or space",
                    log_path.display()
                )));
            }
            log::info!("resuming from {} logged trials", trials.len());
            trials
        }
        None => {
            let mut f = File::create(log_path).map_err(|e| Error::io(log_path, e))?;
            writeln!(f, "{}", serde_json::to_string(&header).expect("serializable"))
                .map_err(|e| Error::io(log_path, e))?;
            Vec::new()
        }
    };
    let mut file = OpenOptions::new()
        .append(true)
        .open(log_path)
        .map_err(|e| Error::io(log_path, e))?;
    let mut append = |t: &Trial| -> Result<()> {
        writeln!(file, "{}", serde_json::to_string(t).expect("serializable")).map_err(|e| Error::io(log_path, e))?;
        file.flush().map_err(|e| Error::io(log_path, e))
    };
    run(&mut objective, space, n_trials, params, seed, history, &mut append)
}
