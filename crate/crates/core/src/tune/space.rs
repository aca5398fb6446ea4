use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Uniform {
        lo: f64,
        hi: f64,
    },
    LogUniform {
        lo: f64,
        hi: f64,
    },
    Int {
        lo: i64,
        hi: i64,
    },
    Categorical {
        choices: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

impl Domain {
    pub fn categorical<S: Into<String>>(choices: impl IntoIterator<Item = S>) -> Self {
        Domain::Categorical {
            choices: choices.into_iter().map(Into::into).collect(),
            weights: None,
        }
    }

    pub fn boolean() -> Self {
        Domain::categorical(["false", "true"])
    }

    /// Normalized prior weights of a categorical domain.
    pub fn prior(&self) -> Option<Vec<f64>> {
        let Domain::Categorical { choices, weights } = self else {
            return None;
        };
        let w = weights.clone().unwrap_or_else(|| vec![1.0; choices.len()]);
        let total: f64 = w.iter().sum();
        Some(w.into_iter().map(|v| v / total).collect())
    }
}

/// Activation rule: the dimension exists only when `parent` took `value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub parent: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Choice(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Choice(_) => None,
        }
    }

    pub fn as_choice(&self) -> Option<&str> {
        match self {
            Value::Choice(s) => Some(s),
            _ => None,
        }
    }
}

pub type Config = BTreeMap<String, Value>;

/// Ordered dimensions; a conditional dimension follows its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Dimension>", into = "Vec<Dimension>")]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl TryFrom<Vec<Dimension>> for SearchSpace {
    type Error = Error;

    fn try_from(dims: Vec<Dimension>) -> Result<Self> {
        SearchSpace::new(dims)
    }
}

impl From<SearchSpace> for Vec<Dimension> {
    fn from(s: SearchSpace) -> Self {
        s.dims
    }
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        let bad = |name: &str, why: &str| Err(Error::InvalidArgument(format!("dimension {name:?}: {why}")));
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].iter().any(|e| e.name == d.name) {
                return bad(&d.name, "duplicate name");
            }
            match &d.domain {
                Domain::Uniform { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                    return bad(&d.name, "needs finite lo < hi")
                }
                Domain::LogUniform { lo, hi } if !(*lo > 0.0 && lo < hi && hi.is_finite()) => {
                    return bad(&d.name, "needs 0 < lo < hi")
                }
                Domain::Int { lo, hi } if lo >= hi => return bad(&d.name, "needs lo < hi"),
                Domain::Categorical { choices, weights } => {
                    if choices.is_empty() {
                        return bad(&d.name, "no choices");
                    }
                    if let Some(w) = weights {
                        if w.len() != choices.len() || w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                            return bad(&d.name, "weights must be positive, one per choice");
                        }
                    }
                }
                _ => {}
            }
            if let Some(c) = &d.condition {
                let parent = dims[..i].iter().find(|e| e.name == c.parent);
                match parent.map(|p| &p.domain) {
                    Some(Domain::Categorical { choices, .. }) if choices.contains(&c.value) => {}
                    _ => {
                        return bad(
                            &d.name,
                            "condition must name an earlier categorical parent and one of its choices",
                        )
                    }
                }
            }
        }
        Ok(SearchSpace { dims })
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn get(&self, name: &str) -> Option<&Dimension> {
        self.dims.iter().find(|d| d.name == name)
    }

    /// Whether `dim` is active given the values already in `config`.
    pub fn is_active(dim: &Dimension, config: &Config) -> bool {
        match &dim.condition {
            None => true,
            Some(c) => config.get(&c.parent).and_then(Value::as_choice) == Some(c.value.as_str()),
        }
    }

    /// Checks bounds and that exactly the active dimensions are assigned.
    pub fn contains(&self, config: &Config) -> bool {
        let mut active = 0;
        for d in &self.dims {
            if !Self::is_active(d, config) {
                if config.contains_key(&d.name) {
                    return false;
                }
                continue;
            }
            active += 1;
            let ok = match (config.get(&d.name), &d.domain) {
                (Some(Value::Float(v)), Domain::Uniform { lo, hi } | Domain::LogUniform { lo, hi }) => {
                    lo <= v && v <= hi
                }
                (Some(Value::Int(v)), Domain::Int { lo, hi }) => lo <= v && v <= hi,
                (Some(Value::Choice(v)), Domain::Categorical { choices, .. }) => choices.contains(v),
                _ => false,
            };
            if !ok {
                return false;
            }
        }
        active == config.len()
    }

    /// Pins a categorical dimension to one choice by giving it a singleton domain.
    pub fn fix_choice(&mut self, name: &str, value: &str) -> Result<()> {
        let dim = self
            .dims
            .iter_mut()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no dimension {name:?}")))?;
        match &dim.domain {
            Domain::Categorical { choices, .. } if choices.iter().any(|c| c == value) => {
                dim.domain = Domain::categorical([value]);
                Ok(())
            }
            _ => Err(Error::InvalidArgument(format!("{value:?} is not a choice of {name:?}"))),
        }
    }
}

pub(crate) fn draw_prior<R: Rng>(domain: &Domain, rng: &mut R) -> Value {
    match domain {
        Domain::Uniform { lo, hi } => Value::Float(rng.random_range(*lo..*hi)),
        Domain::LogUniform { lo, hi } => Value::Float(rng.random_range(lo.ln()..hi.ln()).exp().clamp(*lo, *hi)),
        Domain::Int { lo, hi } => Value::Int(rng.random_range(*lo..=*hi)),
        Domain::Categorical { choices, .. } => {
            let prior = domain.prior().expect("categorical");
            let idx = WeightedIndex::new(&prior).expect("validated weights").sample(rng);
            Value::Choice(choices[idx].clone())
        }
    }
}

/// One independent prior draw per active dimension.
pub fn sample_random(space: &SearchSpace, seed: u64) -> Config {
    let mut rng = crate::seed::rng(seed);
    let mut config = Config::new();
    for d in space.dims() {
        if SearchSpace::is_active(d, &config) {
            let v = draw_prior(&d.domain, &mut rng);
            config.insert(d.name.clone(), v);
        }
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(name: &str, domain: Domain) -> Dimension {
        Dimension {
            name: name.into(),
            domain,
            condition: None,
        }
    }

    #[test]
    fn validation() {
        assert!(SearchSpace::new(vec![dim("x", Domain::Uniform { lo: 1.0, hi: 1.0 })]).is_err());
        assert!(SearchSpace::new(vec![dim("x", Domain::LogUniform { lo: 0.0, hi: 1.0 })]).is_err());
        assert!(SearchSpace::new(vec![dim("x", Domain::categorical(Vec::<String>::new()))]).is_err());
        let orphan = Dimension {
            condition: Some(Condition {
                parent: "p".into(),
                value: "a".into(),
            }),
            ..dim("x", Domain::Int { lo: 0, hi: 3 })
        };
        assert!(SearchSpace::new(vec![orphan.clone()]).is_err());
        assert!(SearchSpace::new(vec![dim("p", Domain::categorical(["b"])), orphan.clone()]).is_err());
        assert!(SearchSpace::new(vec![dim("p", Domain::categorical(["a", "b"])), orphan]).is_ok());
    }

    #[test]
    fn singleton_and_mean() {
        let s = SearchSpace::new(vec![dim("c", Domain::categorical(["only"]))]).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_random(&s, seed)["c"], Value::Choice("only".into()));
        }
        let s = SearchSpace::new(vec![dim("u", Domain::Uniform { lo: 0.0, hi: 1.0 })]).unwrap();
        let mean = (0..10_000)
            .map(|i| sample_random(&s, i)["u"].as_f64().unwrap())
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }

    #[test]
    fn conditional_absent_when_inactive() {
        let s = SearchSpace::new(vec![
            dim("p", Domain::categorical(["on", "off"])),
            Dimension {
                condition: Some(Condition {
                    parent: "p".into(),
                    value: "on".into(),
                }),
                ..dim("x", Domain::Int { lo: 1, hi: 9 })
            },
        ])
        .unwrap();
        let mut seen = [false; 2];
        for seed in 0..50 {
            let c = sample_random(&s, seed);
            assert!(s.contains(&c));
            let on = c["p"].as_choice() == Some("on");
            assert_eq!(c.contains_key("x"), on);
            seen[on as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn value_json_roundtrip() {
        let c: Config = [
            ("a".to_string(), Value::Int(3)),
            ("b".to_string(), Value::Float(3.0)),
            ("c".to_string(), Value::Choice("x".into())),
        ]
        .into();
        let back: Config = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn fix_choice_pins() {
        let mut s = SearchSpace::new(vec![dim("b", Domain::boolean())]).unwrap();
        s.fix_choice("b", "false").unwrap();
        assert!((0..20).all(|i| sample_random(&s, i)["b"] == Value::Choice("false".into())));
        assert!(s.fix_choice("b", "maybe").is_err());
    }
}
