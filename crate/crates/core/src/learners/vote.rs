//! The vote meta-classifier and the majority-class baseline it falls back to.

use serde::{Deserialize, Serialize};

use super::{argmax, mean_distribution, LearnError, LearnerSpec, Model, TrainView};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationRule {
    /// One vote per member for its top class.
    Majority,
    /// Mean of the member distributions.
    #[default]
    Average,
}

impl std::str::FromStr for CombinationRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "majority" => Ok(Self::Majority),
            "average" | "average-of-probabilities" => Ok(Self::Average),
            other => Err(format!("unknown combination rule `{other}` (expected majority or average)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VoteParams {
    pub members: Vec<LearnerSpec>,
    pub rule: CombinationRule,
}

/// Always predicts the training class frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroRModel {
    num_features: usize,
    distribution: Vec<f64>,
}

impl ZeroRModel {
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn predicted_class(&self) -> usize {
        argmax(&self.distribution)
    }
}

pub fn fit_zero_r(view: &TrainView<'_>) -> Result<ZeroRModel, LearnError> {
    if view.rows.is_empty() {
        return Err(LearnError::EmptyTraining);
    }
    let n = view.rows.len() as f64;
    Ok(ZeroRModel {
        num_features: view.ds.num_features(),
        distribution: view.class_counts().iter().map(|&c| c as f64 / n).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteModel {
    pub rule: CombinationRule,
    pub members: Vec<Model>,
    /// Used when there are no members.
    pub fallback: ZeroRModel,
}

impl VoteModel {
    pub fn num_features(&self) -> usize {
        self.fallback.num_features()
    }

    pub fn num_classes(&self) -> usize {
        self.fallback.distribution().len()
    }

    pub fn predict_dist(&self, x: &[f64]) -> Vec<f64> {
        if self.members.is_empty() {
            return self.fallback.distribution().to_vec();
        }
        let k = self.num_classes();
        let dists: Vec<Vec<f64>> = self.members.iter().map(|m| m.predict_unchecked(x)).collect();
        match self.rule {
            CombinationRule::Average => mean_distribution(dists.iter().map(Vec::as_slice), k),
            CombinationRule::Majority => {
                let mut votes = vec![0.0; k];
                for d in &dists {
                    votes[argmax(d)] += 1.0;
                }
                let m = dists.len() as f64;
                votes.iter_mut().for_each(|v| *v /= m);
                votes
            }
        }
    }
}

/// Combines already-trained members; `view` trains the empty-vote fallback.
pub fn fit_vote(members: Vec<Model>, rule: CombinationRule, view: &TrainView<'_>) -> Result<VoteModel, LearnError> {
    let fallback = fit_zero_r(view)?;
    for m in &members {
        if m.num_features() != fallback.num_features() || m.num_classes() != fallback.distribution().len() {
            return Err(LearnError::InvalidParam(
                "vote members must be trained on the same attributes and classes".into(),
            ));
        }
    }
    Ok(VoteModel { rule, members, fallback })
}
