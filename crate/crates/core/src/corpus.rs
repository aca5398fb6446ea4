//! Answer datasets: CSV loading, label overlays and summary statistics.
//!
//! Dataset files have the header `id,text,label` (the label column may be
//! omitted, and label cells may be empty outside the training split).
//! Overlay files have the header `id,corrected_label`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    A,
    B,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Task::A),
            "B" => Ok(Task::B),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::A => f.write_str("A"),
            Task::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// One free-text answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledResponse {
    pub id: String,
    pub text: String,
    pub label: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    task: Task,
    split: Split,
    responses: Vec<LabeledResponse>,
}

impl Dataset {
    /// Validates ids, texts and labels.
    pub fn new(task: Task, split: Split, responses: Vec<LabeledResponse>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(responses.len());
        for (i, r) in responses.iter().enumerate() {
            if r.id.is_empty() {
                return Err(Error::Data(format!("response {i}: empty id")));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Data(format!("response {i}: duplicate id {:?}", r.id)));
            }
            if r.text.trim().is_empty() {
                return Err(Error::Data(format!("response {:?}: empty text", r.id)));
            }
            match r.label {
                Some(0) | Some(1) => {}
                Some(l) => return Err(Error::Data(format!("response {:?}: non-binary label {l}", r.id))),
                None if split == Split::Train => {
                    return Err(Error::Data(format!(
                        "response {:?}: training responses must be labeled",
                        r.id
                    )))
                }
                None => {}
            }
        }
        Ok(Dataset { task, split, responses })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn responses(&self) -> &[LabeledResponse] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.responses.iter().map(|r| r.text.as_str()).collect()
    }

    /// All labels, or `None` if any response is unlabeled.
    pub fn labels(&self) -> Option<Vec<u8>> {
        self.responses.iter().map(|r| r.label).collect()
    }

    /// Subset in the order given by `indices`.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            task: self.task,
            split: self.split,
            responses: indices.iter().map(|&i| self.responses[i].clone()).collect(),
        }
    }

    /// Order-sensitive content digest (SHA-256 hex) of ids, texts and labels.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for r in &self.responses {
            h.update(r.id.as_bytes());
            h.update([0x1f]);
            h.update(r.text.as_bytes());
            h.update([0x1f]);
            h.update(match r.label {
                Some(l) => [b'0' + l],
                None => *b"-",
            });
            h.update([0x1e]);
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn csv_row_error(display: &str, err: csv::Error) -> Error {
    let row = err.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::row(display, row, err.to_string())
}

fn parse_label(cell: &str) -> std::result::Result<u8, String> {
    match cell.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("label must be 0 or 1, got {other:?}")),
    }
}

/// Loads a dataset CSV with header `id,text[,label]`.
pub fn load_dataset(path: impl AsRef<Path>, task: Task, split: Split) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_row_error(&display, e))?.clone();
    let names: Vec<&str> = headers
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim())
        .collect();
    let has_label = match names.as_slice() {
        ["id", "text"] => false,
        ["id", "text", "label"] => true,
        _ => {
            return Err(Error::row(
                &display,
                1,
                format!("expected header id,text[,label], got {}", names.join(",")),
            ))
        }
    };
    let width = names.len();

    let mut responses = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_row_error(&display, e))?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != width {
            return Err(Error::row(
                &display,
                row,
                format!("expected {width} columns, found {}", record.len()),
            ));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::row(&display, row, "empty id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::row(&display, row, format!("duplicate id {id:?}")));
        }
        let text = record[1].to_string();
        if text.trim().is_empty() {
            return Err(Error::row(&display, row, "empty text"));
        }
        let label = if has_label && !record[2].trim().is_empty() {
            Some(parse_label(&record[2]).map_err(|m| Error::row(&display, row, m))?)
        } else {
            None
        };
        if label.is_none() && split == Split::Train {
            return Err(Error::row(&display, row, "missing label in training split"));
        }
        responses.push(LabeledResponse { id, text, label });
    }
    Dataset::new(task, split, responses)
}

/// Writes a dataset in the canonical CSV format.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    let res: std::result::Result<(), csv::Error> = (|| {
        w.write_record(["id", "text", "label"])?;
        for r in dataset.responses() {
            let label = r.label.map(|l| l.to_string()).unwrap_or_default();
            w.write_record([r.id.as_str(), r.text.as_str(), label.as_str()])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Manual label corrections, keyed by response id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelOverlay {
    entries: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OverlaySummary {
    pub zero_to_one: usize,
    pub one_to_zero: usize,
}

impl LabelOverlay {
    pub fn new(entries: BTreeMap<String, u8>) -> Result<Self> {
        if let Some((id, l)) = entries.iter().find(|(_, &l)| l > 1) {
            return Err(Error::Data(format!("overlay entry {id:?}: non-binary label {l}")));
        }
        Ok(LabelOverlay { entries })
    }

    pub fn entries(&self) -> &BTreeMap<String, u8> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The overlay that restores the labels `dataset` currently has for
    /// every id this overlay touches.
    pub fn inverse(&self, dataset: &Dataset) -> Result<LabelOverlay> {
        let labels: BTreeMap<&str, Option<u8>> = dataset.responses().iter().map(|r| (r.id.as_str(), r.label)).collect();
        let mut entries = BTreeMap::new();
        for id in self.entries.keys() {
            match labels.get(id.as_str()) {
                Some(Some(l)) => {
                    entries.insert(id.clone(), *l);
                }
                _ => return Err(Error::Data(format!("overlay id {id:?} not in dataset"))),
            }
        }
        LabelOverlay::new(entries)
    }
}

/// Loads an overlay CSV with header `id,corrected_label`.
pub fn load_overlay(path: impl AsRef<Path>) -> Result<LabelOverlay> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_row_error(&display, e))?.clone();
    let names: Vec<&str> = headers
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim())
        .collect();
    if names != ["id", "corrected_label"] {
        return Err(Error::row(
            &display,
            1,
            format!("expected header id,corrected_label, got {}", names.join(",")),
        ));
    }
    let mut entries = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_row_error(&display, e))?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::row(
                &display,
                row,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let id = record[0].trim().to_string();
        let label = parse_label(&record[1]).map_err(|m| Error::row(&display, row, m))?;
        if entries.insert(id.clone(), label).is_some() {
            return Err(Error::row(&display, row, format!("duplicate id {id:?}")));
        }
    }
    LabelOverlay::new(entries)
}

/// Returns a copy of `dataset` with the overlay's labels applied.
///
/// Every overlay id must exist, and every entry must actually change the
/// label; no-op entries are rejected.
pub fn apply_overlay(dataset: &Dataset, overlay: &LabelOverlay) -> Result<(Dataset, OverlaySummary)> {
    if dataset.split() != Split::Train {
        return Err(Error::InvalidArgument(
            "label overlays apply only to the training split".into(),
        ));
    }
    let ids: HashSet<&str> = dataset.responses().iter().map(|r| r.id.as_str()).collect();
    if let Some(missing) = overlay.entries.keys().find(|id| !ids.contains(id.as_str())) {
        return Err(Error::Data(format!("overlay id {missing:?} not in dataset")));
    }
    let mut summary = OverlaySummary::default();
    let mut responses = dataset.responses().to_vec();
    for r in &mut responses {
        let Some(&corrected) = overlay.entries.get(&r.id) else {
            continue;
        };
        match (r.label, corrected) {
            (Some(0), 1) => summary.zero_to_one += 1,
            (Some(1), 0) => summary.one_to_zero += 1,
            (old, new) => {
                return Err(Error::Data(format!(
                    "overlay entry {:?} does not change the label ({old:?} -> {new})",
                    r.id
                )))
            }
        }
        r.label = Some(corrected);
    }
    Ok((Dataset::new(dataset.task(), dataset.split(), responses)?, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_total: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    /// Share of positives among labeled responses.
    pub positive_fraction: f64,
    /// Mean number of Unicode scalar values per raw answer.
    pub avg_chars: f64,
}

pub fn summarize(dataset: &Dataset) -> Result<DatasetStats> {
    if dataset.is_empty() {
        return Err(Error::Data("cannot summarize an empty dataset".into()));
    }
    let n_total = dataset.len();
    let n_positive = dataset.responses().iter().filter(|r| r.label == Some(1)).count();
    let n_negative = dataset.responses().iter().filter(|r| r.label == Some(0)).count();
    let labeled = n_positive + n_negative;
    let chars: usize = dataset.responses().iter().map(|r| r.text.chars().count()).sum();
    Ok(DatasetStats {
        n_total,
        n_positive,
        n_negative,
        positive_fraction: if labeled == 0 {
            0.0
        } else {
            n_positive as f64 / labeled as f64
        },
        avg_chars: chars as f64 / n_total as f64,
    })
}
