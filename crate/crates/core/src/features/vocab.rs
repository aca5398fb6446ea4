use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Lexicographically ordered term list with document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        Vocabulary::from_parts(r.terms, r.doc_freq)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                actual: doc_freq.len(),
            });
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data("vocabulary terms must be sorted and unique".into()));
        }
        if doc_freq.contains(&0) {
            return Err(Error::Data("vocabulary document frequency of zero".into()));
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary { terms, doc_freq, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// Keeps terms appearing in at least `min_df` documents.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::InvalidArgument("no documents".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df.max(1))
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Vocabulary::from_parts(terms, doc_freq)
}

/// Term counts per document; tokens outside the vocabulary are ignored.
pub fn count_vectorize<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> Result<SparseMatrix> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for t in doc {
                if let Some(j) = vocab.get(t.as_ref()) {
                    *counts.entry(j).or_default() += 1.0;
                }
            }
            counts.into_iter().collect()
        })
        .collect();
    SparseMatrix::from_rows(vocab.len(), rows)
}
