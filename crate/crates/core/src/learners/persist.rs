//! Versioned JSON model files.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LearnerSpec, Model};
use crate::dataio::Dataset;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("invalid model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file is missing `format_version`")]
    MissingVersion,
    #[error("unsupported model format version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("inconsistent model file: {0}")]
    Inconsistent(String),
}

/// A trained model plus everything needed to apply it to new data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub learner: String,
    pub params: LearnerSpec,
    pub seed: u64,
    /// Feature attribute names, in order.
    pub attributes: Vec<String>,
    pub classes: Vec<String>,
    pub model: Model,
}

impl SavedModel {
    pub fn new(spec: &LearnerSpec, seed: u64, train: &Dataset, model: Model) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            learner: spec.name().to_owned(),
            params: spec.clone(),
            seed,
            attributes: train.attributes().iter().map(|a| a.name.clone()).collect(),
            classes: train.class_names().to_vec(),
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("models serialize to JSON");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or(ModelFileError::MissingVersion)?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(ModelFileError::UnsupportedVersion(version));
        }
        let saved: SavedModel = serde_json::from_value(value)?;
        saved.check()?;
        Ok(saved)
    }

    fn check(&self) -> Result<(), ModelFileError> {
        let bad = |m: String| Err(ModelFileError::Inconsistent(m));
        if self.model.num_features() != self.attributes.len() {
            return bad(format!(
                "model expects {} features but lists {} attributes",
                self.model.num_features(),
                self.attributes.len()
            ));
        }
        if self.model.num_classes() != self.classes.len() {
            return bad(format!(
                "model predicts {} classes but lists {}",
                self.model.num_classes(),
                self.classes.len()
            ));
        }
        check_model(&self.model, self.attributes.len(), self.classes.len())
            .map_err(ModelFileError::Inconsistent)
    }
}

fn check_model(model: &Model, d: usize, k: usize) -> Result<(), String> {
    let shape = |what: &str, features: usize, classes: usize| {
        if features != d || classes != k {
            Err(format!("{what} has shape {features}x{classes}, expected {d}x{k}"))
        } else {
            Ok(())
        }
    };
    match model {
        Model::ZeroR(m) => shape("zeror", m.num_features(), m.distribution().len()),
        Model::Tree(t) => {
            shape("tree", t.num_features(), t.num_classes())?;
            t.validate()
        }
        Model::Bagging(m) => check_trees(&m.members, d, k),
        Model::Forest(m) => check_trees(&m.members, d, k),
        Model::BayesNet(m) => {
            if m.bin_edges.len() != d || m.tables.len() != d || m.priors.len() != k {
                return Err("bayesnet tables do not match the attributes".into());
            }
            for (edges, table) in m.bin_edges.iter().zip(&m.tables) {
                if table.len() != k || table.iter().any(|row| row.len() != edges.len() + 1) {
                    return Err("bayesnet table has the wrong bin count".into());
                }
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err("bayesnet bin edges are not ascending".into());
                }
            }
            Ok(())
        }
        Model::Vote(v) => {
            shape("vote fallback", v.fallback.num_features(), v.fallback.distribution().len())?;
            v.members.iter().try_for_each(|m| check_model(m, d, k))
        }
    }
}

fn check_trees(trees: &[super::TreeModel], d: usize, k: usize) -> Result<(), String> {
    if trees.is_empty() {
        return Err("ensemble has no members".into());
    }
    for t in trees {
        if t.num_features() != d || t.num_classes() != k {
            return Err("ensemble member has the wrong shape".into());
        }
        t.validate()?;
    }
    Ok(())
}
