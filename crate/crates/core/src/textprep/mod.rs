//! Answer text to token lists.
//!
//! [`preprocess`] runs the stages in a fixed order, each gated by a
//! [`PrepConfig`] flag: tokenize, slang normalization, typo correction,
//! lemmatization, stopword removal.

mod similarity;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use similarity::{matched_chars, similarity};

pub type TokenList = Vec<String>;

/// Default typo-correction cutoff.
pub const DEFAULT_TYPO_CUTOFF: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub use_slang_norm: bool,
    pub use_typo_correction: bool,
    pub typo_cutoff: f64,
    pub use_lemmatize: bool,
    pub use_stopword_removal: bool,
}

impl Default for PrepConfig {
    /// Lemmatization on, everything else off.
    fn default() -> Self {
        PrepConfig {
            use_slang_norm: false,
            use_typo_correction: false,
            typo_cutoff: DEFAULT_TYPO_CUTOFF,
            use_lemmatize: true,
            use_stopword_removal: false,
        }
    }
}

impl PrepConfig {
    pub fn tokenize_only() -> Self {
        PrepConfig {
            use_lemmatize: false,
            ..PrepConfig::default()
        }
    }

    pub fn validate(&self, lex: &LexiconSet) -> Result<()> {
        if !(self.typo_cutoff > 0.0 && self.typo_cutoff <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "typo_cutoff must be in (0, 1], got {}",
                self.typo_cutoff
            )));
        }
        if self.use_typo_correction && lex.reference_vocab.is_empty() {
            return Err(Error::InvalidArgument(
                "typo correction needs a nonempty reference vocabulary".into(),
            ));
        }
        Ok(())
    }
}

/// Dictionaries used by the preprocessing stages.
///
/// Map chains (`a -> b`, `b -> c`) are resolved on construction so that
/// every lookup stage is idempotent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconSet {
    slang_map: BTreeMap<String, String>,
    lemma_map: BTreeMap<String, String>,
    stopwords: BTreeSet<String>,
    reference_vocab: BTreeSet<String>,
}

fn clean_word(w: &str, what: &str) -> Result<String> {
    let w = w.trim().to_lowercase();
    if w.is_empty() {
        return Err(Error::Data(format!("{what}: empty entry")));
    }
    if w.chars().any(char::is_whitespace) {
        return Err(Error::Data(format!("{what}: entry {w:?} contains whitespace")));
    }
    Ok(w)
}

fn resolve_chains(map: BTreeMap<String, String>, what: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for key in map.keys() {
        let mut cur = key;
        let mut steps = 0;
        while let Some(next) = map.get(cur) {
            if next == cur {
                break;
            }
            cur = next;
            steps += 1;
            if steps > map.len() {
                return Err(Error::Data(format!("{what}: cycle through {key:?}")));
            }
        }
        if cur != key {
            out.insert(key.clone(), cur.clone());
        }
    }
    Ok(out)
}

impl LexiconSet {
    pub fn new<S: AsRef<str>>(
        slang: impl IntoIterator<Item = (S, S)>,
        lemma: impl IntoIterator<Item = (S, S)>,
        stopwords: impl IntoIterator<Item = S>,
        reference_vocab: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let pairs = |it: Box<dyn Iterator<Item = (S, S)>>, what: &str| -> Result<BTreeMap<String, String>> {
            let mut m = BTreeMap::new();
            for (k, v) in it {
                m.insert(clean_word(k.as_ref(), what)?, clean_word(v.as_ref(), what)?);
            }
            resolve_chains(m, what)
        };
        let words = |it: Box<dyn Iterator<Item = S>>, what: &str| -> Result<BTreeSet<String>> {
            it.map(|w| clean_word(w.as_ref(), what)).collect()
        };
        Ok(LexiconSet {
            slang_map: pairs(Box::new(slang.into_iter()), "slang map")?,
            lemma_map: pairs(Box::new(lemma.into_iter()), "lemma map")?,
            stopwords: words(Box::new(stopwords.into_iter()), "stopwords")?,
            reference_vocab: words(Box::new(reference_vocab.into_iter()), "reference vocabulary")?,
        })
    }

    /// Loads whichever of `slang.tsv`, `lemma.tsv`, `stopwords.txt` and
    /// `vocab.txt` exist in `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "lexicon directory not found"),
            ));
        }
        let opt = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.exists() {
                std::fs::read_to_string(&p).map(Some).map_err(|e| Error::io(&p, e))
            } else {
                Ok(None)
            }
        };
        let slang = opt("slang.tsv")?.map(|s| parse_tsv(&s, "slang.tsv")).transpose()?;
        let lemma = opt("lemma.tsv")?.map(|s| parse_tsv(&s, "lemma.tsv")).transpose()?;
        let stop = opt("stopwords.txt")?.map(|s| parse_lines(&s));
        let vocab = opt("vocab.txt")?.map(|s| parse_lines(&s));
        LexiconSet::new(
            slang.unwrap_or_default(),
            lemma.unwrap_or_default(),
            stop.unwrap_or_default(),
            vocab.unwrap_or_default(),
        )
    }

    pub fn slang_map(&self) -> &BTreeMap<String, String> {
        &self.slang_map
    }

    pub fn lemma_map(&self) -> &BTreeMap<String, String> {
        &self.lemma_map
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn reference_vocab(&self) -> &BTreeSet<String> {
        &self.reference_vocab
    }
}

/// `surface<TAB>replacement` lines; blank lines and `#` comments skipped.
pub fn parse_tsv(body: &str, what: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in body.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('\t') else {
            return Err(Error::row(what, n + 1, "expected surface<TAB>replacement"));
        };
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn parse_lines(body: &str) -> Vec<String> {
    body.lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Lowercases, splits on whitespace and strips leading/trailing
/// non-alphanumeric characters from each token. Inner hyphens survive.
pub fn tokenize(text: &str) -> TokenList {
    text.split_whitespace()
        .map(|w| w.trim_matches(is_edge_punct).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn map_tokens(tokens: TokenList, map: &BTreeMap<String, String>) -> TokenList {
    tokens.into_iter().map(|t| map.get(&t).cloned().unwrap_or(t)).collect()
}

pub fn normalize_slang(tokens: TokenList, lex: &LexiconSet) -> TokenList {
    map_tokens(tokens, &lex.slang_map)
}

pub fn lemmatize(tokens: TokenList, lex: &LexiconSet) -> TokenList {
    map_tokens(tokens, &lex.lemma_map)
}

pub fn remove_stopwords(tokens: TokenList, lex: &LexiconSet) -> TokenList {
    tokens.into_iter().filter(|t| !lex.stopwords.contains(t)).collect()
}

/// Closest reference word to `token` with similarity at least `cutoff`.
/// Ties go to the lexicographically smallest candidate.
pub fn closest_word<'a>(token: &str, vocab: &'a BTreeSet<String>, cutoff: f64) -> Option<&'a str> {
    let mut best: Option<(&str, f64)> = None;
    // BTreeSet iterates in lexicographic order; strict > keeps the first
    for cand in vocab {
        let s = similarity(token, cand);
        if s >= cutoff && best.is_none_or(|(_, b)| s > b) {
            best = Some((cand, s));
        }
    }
    best.map(|(w, _)| w)
}

pub fn correct_typos(tokens: TokenList, lex: &LexiconSet, cutoff: f64) -> TokenList {
    tokens
        .into_iter()
        .map(|t| {
            if lex.reference_vocab.contains(&t) {
                return t;
            }
            match closest_word(&t, &lex.reference_vocab, cutoff) {
                Some(w) => w.to_string(),
                None => t,
            }
        })
        .collect()
}

pub fn preprocess(text: &str, lex: &LexiconSet, config: &PrepConfig) -> Result<TokenList> {
    config.validate(lex)?;
    let mut tokens = tokenize(text);
    if config.use_slang_norm {
        tokens = normalize_slang(tokens, lex);
    }
    if config.use_typo_correction {
        tokens = correct_typos(tokens, lex, config.typo_cutoff);
    }
    if config.use_lemmatize {
        tokens = lemmatize(tokens, lex);
    }
    if config.use_stopword_removal {
        tokens = remove_stopwords(tokens, lex);
    }
    Ok(tokens)
}
