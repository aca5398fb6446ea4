use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::parzen::Parzen1D;
use super::space::{sample_random, Config, Domain, SearchSpace, Value};
use super::{Trial, TrialStatus};
use crate::error::{Error, Result};
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpeParams {
    /// Completed trials required before the density model is used.
    pub n_startup: usize,
    pub gamma: f64,
    pub n_candidates: usize,
    pub prior_weight: f64,
}

impl Default for TpeParams {
    fn default() -> Self {
        TpeParams {
            n_startup: 20,
            gamma: 0.25,
            n_candidates: 24,
            prior_weight: 1.0,
        }
    }
}

impl TpeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_startup == 0 || !(self.gamma > 0.0 && self.gamma < 1.0) || self.n_candidates == 0 {
            return Err(Error::InvalidArgument(format!("invalid TPE parameters {self:?}")));
        }
        if !(self.prior_weight > 0.0 && self.prior_weight.is_finite()) {
            return Err(Error::InvalidArgument("prior_weight must be positive".into()));
        }
        Ok(())
    }
}

/// Support of a numeric dimension in the space its kernels live in.
fn numeric_support(domain: &Domain) -> Option<(f64, f64)> {
    match domain {
        Domain::Uniform { lo, hi } => Some((*lo, *hi)),
        Domain::LogUniform { lo, hi } => Some((lo.ln(), hi.ln())),
        Domain::Int { lo, hi } => Some((*lo as f64 - 0.5, *hi as f64 + 0.5)),
        Domain::Categorical { .. } => None,
    }
}

fn to_internal(domain: &Domain, v: &Value) -> Option<f64> {
    match domain {
        Domain::LogUniform { .. } => v.as_f64().map(f64::ln),
        _ => v.as_f64(),
    }
}

/// Reweighted categorical density: observed counts plus `prior_weight`
/// times the prior, normalized.
pub fn categorical_density(domain: &Domain, observed: &[&str], prior_weight: f64) -> Vec<f64> {
    let Domain::Categorical { choices, .. } = domain else {
        return Vec::new();
    };
    let prior = domain.prior().expect("categorical");
    let mut w: Vec<f64> = prior.iter().map(|p| prior_weight * p).collect();
    for o in observed {
        if let Some(i) = choices.iter().position(|c| c == o) {
            w[i] += 1.0;
        }
    }
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

enum Density {
    Numeric(Parzen1D),
    Categorical(Vec<f64>),
}

impl Density {
    fn fit(domain: &Domain, trials: &[&Trial], name: &str, prior_weight: f64) -> Self {
        let values: Vec<&Value> = trials.iter().filter_map(|t| t.config.get(name)).collect();
        match numeric_support(domain) {
            Some((lo, hi)) => {
                let obs: Vec<f64> = values.iter().filter_map(|v| to_internal(domain, v)).collect();
                Density::Numeric(Parzen1D::fit(&obs, lo, hi, prior_weight))
            }
            None => {
                let obs: Vec<&str> = values.iter().filter_map(|v| v.as_choice()).collect();
                Density::Categorical(categorical_density(domain, &obs, prior_weight))
            }
        }
    }

    fn log_density(&self, domain: &Domain, v: &Value) -> f64 {
        match (self, domain) {
            (Density::Numeric(p), Domain::Int { .. }) => {
                let x = v.as_f64().unwrap_or(f64::NAN);
                p.interval_mass(x - 0.5, x + 0.5).ln()
            }
            (Density::Numeric(p), _) => p.pdf(to_internal(domain, v).unwrap_or(f64::NAN)).ln(),
            (Density::Categorical(w), Domain::Categorical { choices, .. }) => {
                let i = choices.iter().position(|c| Some(c.as_str()) == v.as_choice());
                i.map_or(f64::NEG_INFINITY, |i| w[i].ln())
            }
            _ => f64::NEG_INFINITY,
        }
    }

    fn sample(&self, domain: &Domain, rng: &mut Rng) -> Value {
        match (self, domain) {
            (Density::Numeric(p), Domain::Int { lo, hi }) => Value::Int((p.sample(rng).round() as i64).clamp(*lo, *hi)),
            (Density::Numeric(p), Domain::LogUniform { lo, hi }) => Value::Float(p.sample(rng).exp().clamp(*lo, *hi)),
            (Density::Numeric(p), _) => Value::Float(p.sample(rng)),
            (Density::Categorical(w), Domain::Categorical { choices, .. }) => {
                let i = WeightedIndex::new(w).expect("positive weights").sample(rng);
                Value::Choice(choices[i].clone())
            }
            _ => unreachable!("density kind follows the domain"),
        }
    }
}

/// Splits completed trials into the best `ceil(gamma * n)` and the rest.
/// Objective ties keep the earlier trial first.
pub fn split_good_bad(history: &[Trial], gamma: f64) -> (Vec<&Trial>, Vec<&Trial>) {
    let mut ok: Vec<&Trial> = history.iter().filter(|t| t.status == TrialStatus::Ok).collect();
    ok.sort_by(|a, b| {
        b.objective
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.objective.unwrap_or(f64::NEG_INFINITY))
            .then(a.index.cmp(&b.index))
    });
    let n_good = (gamma * ok.len() as f64).ceil() as usize;
    let bad = ok.split_off(n_good.min(ok.len()));
    (ok, bad)
}

/// Next configuration to evaluate. With fewer than `n_startup` completed
/// trials this is exactly `sample_random(space, seed)`.
pub fn tpe_suggest(history: &[Trial], space: &SearchSpace, params: &TpeParams, seed: u64) -> Config {
    let n_ok = history.iter().filter(|t| t.status == TrialStatus::Ok).count();
    if n_ok < params.n_startup {
        if !history.is_empty() && n_ok == 0 && history.len() >= params.n_startup {
            log::warn!("no completed trials among {}; sampling from the prior", history.len());
        }
        return sample_random(space, seed);
    }
    let (good, bad) = split_good_bad(history, params.gamma);
    let densities: Vec<(Density, Density)> = space
        .dims()
        .iter()
        .map(|d| {
            (
                Density::fit(&d.domain, &good, &d.name, params.prior_weight),
                Density::fit(&d.domain, &bad, &d.name, params.prior_weight),
            )
        })
        .collect();
    let mut rng = crate::seed::rng(seed);
    let mut best: Option<(f64, Config)> = None;
    for _ in 0..params.n_candidates {
        let mut cand = Config::new();
        let mut score = 0.0;
        for (d, (l, g)) in space.dims().iter().zip(&densities) {
            if !SearchSpace::is_active(d, &cand) {
                continue;
            }
            let v = l.sample(&d.domain, &mut rng);
            score += l.log_density(&d.domain, &v) - g.log_density(&d.domain, &v);
            cand.insert(d.name.clone(), v);
        }
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, cand));
        }
    }
    best.expect("n_candidates >= 1").1
}
