use serde::{Deserialize, Serialize};

use super::{threshold, Classifier, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VotingMode {
    Hard,
    Soft,
}

/// Combines per-member class-1 probabilities (`member_probs[m][row]`).
///
/// Hard voting takes the majority of thresholded member labels; a tied vote
/// is settled by the mean probability. Soft voting thresholds the mean
/// probability. The mean probability is returned in both modes.
pub fn vote(member_probs: &[Vec<f64>], mode: VotingMode) -> Result<(Vec<u8>, Vec<f64>)> {
    let Some(first) = member_probs.first() else {
        return Err(Error::InvalidArgument("no ensemble members".into()));
    };
    let n = first.len();
    if let Some(bad) = member_probs.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let m = member_probs.len();
    let mean: Vec<f64> = (0..n)
        .map(|i| member_probs.iter().map(|p| p[i]).sum::<f64>() / m as f64)
        .collect();
    let labels = match mode {
        VotingMode::Soft => threshold(&mean),
        VotingMode::Hard => (0..n)
            .map(|i| {
                let ones = member_probs.iter().filter(|p| p[i] >= 0.5).count();
                match (2 * ones).cmp(&m) {
                    std::cmp::Ordering::Greater => 1,
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Equal => u8::from(mean[i] >= 0.5),
                }
            })
            .collect(),
    };
    Ok((labels, mean))
}

/// Voting ensemble over classifiers fitted on the same feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct VotingEnsemble {
    members: Vec<Classifier>,
    mode: VotingMode,
}

impl VotingEnsemble {
    pub fn new(members: Vec<Classifier>, mode: VotingMode) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidArgument("an ensemble needs at least two members".into()));
        }
        let d = members[0].n_features();
        if let Some(bad) = members.iter().find(|m| m.n_features() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.n_features(),
            });
        }
        Ok(VotingEnsemble { members, mode })
    }

    pub fn members(&self) -> &[Classifier] {
        &self.members
    }

    pub fn mode(&self) -> VotingMode {
        self.mode
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<(Vec<u8>, Vec<f64>)> {
        let probs = self
            .members
            .iter()
            .map(|m| m.predict_proba(x))
            .collect::<Result<Vec<_>>>()?;
        vote(&probs, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LogRegModel;

    #[test]
    fn hard_and_soft() {
        let (l, _) = vote(&[vec![0.9], vec![0.8], vec![0.1]], VotingMode::Hard).unwrap();
        assert_eq!(l, vec![1]);
        let (l, _) = vote(&[vec![0.9, 0.2], vec![0.6, 0.1], vec![0.7, 0.4]], VotingMode::Hard).unwrap();
        assert_eq!(l, vec![1, 0]);
        let (l, mean) = vote(&[vec![0.9], vec![0.2], vec![0.2]], VotingMode::Soft).unwrap();
        assert!((mean[0] - 0.4333333333333333).abs() < 1e-15);
        assert_eq!(l, vec![0]);
        // same inputs, hard voting: one yes against two no
        assert_eq!(
            vote(&[vec![0.9], vec![0.2], vec![0.2]], VotingMode::Hard).unwrap().0,
            vec![0]
        );
    }

    #[test]
    fn hard_ties_use_mean() {
        assert_eq!(vote(&[vec![0.9], vec![0.3]], VotingMode::Hard).unwrap().0, vec![1]);
        assert_eq!(vote(&[vec![0.6], vec![0.1]], VotingMode::Hard).unwrap().0, vec![0]);
    }

    #[test]
    fn member_checks() {
        let lr = |d: usize| {
            Classifier::Logreg(LogRegModel {
                weights: vec![0.0; d],
                intercept: 0.0,
                c_reg: 1.0,
                converged: true,
                n_iters: 0,
            })
        };
        assert!(VotingEnsemble::new(vec![lr(2)], VotingMode::Soft).is_err());
        assert!(VotingEnsemble::new(vec![lr(2), lr(3)], VotingMode::Soft).is_err());
        assert!(VotingEnsemble::new(vec![lr(2), lr(2)], VotingMode::Soft).is_ok());
        assert!(vote(&[vec![0.1], vec![]], VotingMode::Soft).is_err());
    }
}
