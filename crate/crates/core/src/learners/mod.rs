//! Classifiers: CART trees, bagging, random forests, a discretized naive Bayes
//! network, the vote meta-classifier and the majority-class baseline.
//!
//! Every learner is deterministic in `(training rows, params, seed)`. Random
//! choices come from [`prng::Prng`] streams keyed by a label and a member
//! index, so ensemble members can be trained in parallel without changing
//! the result.

pub mod bayes;
pub mod ensemble;
pub mod persist;
pub mod prng;
pub mod tree;
pub mod vote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::Dataset;

pub use bayes::{discretize_apply, discretize_fit, fit_naive_bayes, BayesParams, NaiveBayesModel};
pub use ensemble::{fit_bagging, fit_forest, BaggingModel, BaggingParams, ForestModel, ForestParams};
pub use prng::{bootstrap_sample, Prng};
pub use tree::{fit_tree, MaxFeatures, TreeModel, TreeParams};
pub use vote::{fit_vote, fit_zero_r, CombinationRule, VoteModel, VoteParams, ZeroRModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("instance has {found} value(s), model expects {expected}")]
    Arity { expected: usize, found: usize },
}

/// A dataset restricted to some of its rows. Rows may repeat (bootstrap).
#[derive(Clone, Copy, Debug)]
pub struct TrainView<'a> {
    pub ds: &'a Dataset,
    pub rows: &'a [usize],
}

impl<'a> TrainView<'a> {
    pub fn new(ds: &'a Dataset, rows: &'a [usize]) -> Self {
        Self { ds, rows }
    }

    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.ds.num_classes()];
        for &r in self.rows {
            counts[self.ds.label(r)] += 1;
        }
        counts
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate().skip(1) {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

/// Element-wise mean of equally long distributions, summed in the given order.
pub(crate) fn mean_distribution<'a>(dists: impl Iterator<Item = &'a [f64]>, k: usize) -> Vec<f64> {
    let mut sum = vec![0.0; k];
    let mut m = 0usize;
    for d in dists {
        for (s, &p) in sum.iter_mut().zip(d) {
            *s += p;
        }
        m += 1;
    }
    sum.iter_mut().for_each(|s| *s /= m as f64);
    sum
}

/// A trained classifier of any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    #[serde(rename = "zeror")]
    ZeroR(ZeroRModel),
    Tree(TreeModel),
    Bagging(BaggingModel),
    Forest(ForestModel),
    #[serde(rename = "bayesnet")]
    BayesNet(NaiveBayesModel),
    Vote(VoteModel),
}

impl Model {
    pub fn num_features(&self) -> usize {
        match self {
            Model::ZeroR(m) => m.num_features(),
            Model::Tree(m) => m.num_features(),
            Model::Bagging(m) => m.num_features(),
            Model::Forest(m) => m.num_features(),
            Model::BayesNet(m) => m.num_features(),
            Model::Vote(m) => m.num_features(),
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            Model::ZeroR(m) => m.distribution().len(),
            Model::Tree(m) => m.num_classes(),
            Model::Bagging(m) => m.num_classes(),
            Model::Forest(m) => m.num_classes(),
            Model::BayesNet(m) => m.num_classes(),
            Model::Vote(m) => m.num_classes(),
        }
    }

    /// Class-probability vector for one instance (feature values only).
    pub fn predict_dist(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        if x.len() != self.num_features() {
            return Err(LearnError::Arity { expected: self.num_features(), found: x.len() });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Model::ZeroR(m) => m.distribution().to_vec(),
            Model::Tree(m) => m.predict_dist(x).to_vec(),
            Model::Bagging(m) => m.predict_dist(x),
            Model::Forest(m) => m.predict_dist(x),
            Model::BayesNet(m) => m.predict_dist(x),
            Model::Vote(m) => m.predict_dist(x),
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<usize, LearnError> {
        Ok(argmax(&self.predict_dist(x)?))
    }
}

/// Names accepted on the command line, in display order.
pub const LEARNER_NAMES: [&str; 6] = ["zeror", "tree", "bagging", "forest", "bayesnet", "vote"];

/// A learner and its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LearnerSpec {
    #[serde(rename = "zeror")]
    ZeroR,
    Tree(TreeParams),
    Bagging(BaggingParams),
    Forest(ForestParams),
    #[serde(rename = "bayesnet")]
    BayesNet(BayesParams),
    Vote(VoteParams),
}

impl LearnerSpec {
    /// The learner with default parameters; `vote` starts with no members.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "zeror" => LearnerSpec::ZeroR,
            "tree" => LearnerSpec::Tree(TreeParams::default()),
            "bagging" => LearnerSpec::Bagging(BaggingParams::default()),
            "forest" => LearnerSpec::Forest(ForestParams::default()),
            "bayesnet" => LearnerSpec::BayesNet(BayesParams::default()),
            "vote" => LearnerSpec::Vote(VoteParams::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::ZeroR => "zeror",
            LearnerSpec::Tree(_) => "tree",
            LearnerSpec::Bagging(_) => "bagging",
            LearnerSpec::Forest(_) => "forest",
            LearnerSpec::BayesNet(_) => "bayesnet",
            LearnerSpec::Vote(_) => "vote",
        }
    }

    /// Trains on `rows` of `ds`.
    pub fn fit(&self, ds: &Dataset, rows: &[usize], seed: u64) -> Result<Model, LearnError> {
        let view = TrainView::new(ds, rows);
        Ok(match self {
            LearnerSpec::ZeroR => Model::ZeroR(fit_zero_r(&view)?),
            LearnerSpec::Tree(p) => {
                Model::Tree(fit_tree(&view, p, &mut Prng::stream(seed, "tree", 0))?)
            }
            LearnerSpec::Bagging(p) => Model::Bagging(fit_bagging(&view, p, seed)?),
            LearnerSpec::Forest(p) => Model::Forest(fit_forest(&view, p, seed)?),
            LearnerSpec::BayesNet(p) => Model::BayesNet(fit_naive_bayes(&view, p)?),
            LearnerSpec::Vote(p) => {
                let members = p
                    .members
                    .iter()
                    .map(|m| m.fit(ds, rows, seed))
                    .collect::<Result<Vec<_>, _>>()?;
                Model::Vote(fit_vote(members, p.rule, &view)?)
            }
        })
    }

    /// Trains on every row of `ds`.
    pub fn fit_all(&self, ds: &Dataset, seed: u64) -> Result<Model, LearnError> {
        let rows: Vec<usize> = (0..ds.len()).collect();
        self.fit(ds, &rows, seed)
    }

    /// Short human-readable form, e.g. `forest(t=100,mtry=auto)`.
    pub fn describe(&self) -> String {
        match self {
            LearnerSpec::ZeroR => "zeror".into(),
            LearnerSpec::Tree(p) => format!("tree({})", describe_tree(p)),
            LearnerSpec::Bagging(p) => format!("bagging(t={},{})", p.iterations, describe_tree(&p.base)),
            LearnerSpec::Forest(p) => format!(
                "forest(t={},mtry={})",
                p.trees,
                p.mtry.map_or("auto".to_owned(), |m| m.to_string())
            ),
            LearnerSpec::BayesNet(p) => format!("bayesnet(bins={},alpha={})", p.bins, p.alpha),
            LearnerSpec::Vote(p) => {
                let members: Vec<String> = p.members.iter().map(|m| m.describe()).collect();
                format!("vote({:?},[{}])", p.rule, members.join(","))
            }
        }
    }
}

fn describe_tree(p: &TreeParams) -> String {
    match p.max_features {
        MaxFeatures::All => format!("min_leaf={}", p.min_leaf),
        MaxFeatures::Count(m) => format!("max_features={m},min_leaf={}", p.min_leaf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[1.0]), 0);
    }

    #[test]
    fn names_round_trip() {
        for name in LEARNER_NAMES {
            assert_eq!(LearnerSpec::from_name(name).unwrap().name(), name);
        }
        assert!(LearnerSpec::from_name("frobnicate").is_none());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = LearnerSpec::Vote(VoteParams {
            members: vec![LearnerSpec::ZeroR, LearnerSpec::Forest(ForestParams::default())],
            rule: CombinationRule::Majority,
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<LearnerSpec>(&text).unwrap(), spec);
    }
}
