//! Answer-selection classifiers: a random forest and two baselines.

mod dataset;
mod forest;
mod importance;
mod knn;
mod logistic;
mod persist;
mod tree;

pub use dataset::{build_training_set, exclusive_label, Label, TrainingSet};
pub use forest::{train_forest, ForestModel, ForestParams, MaxFeatures};
pub use importance::{permutation_importance, rank_features};
pub use knn::{train_knn, KnnModel};
pub use logistic::{train_logistic, LogisticModel, LogisticParams};
pub use persist::{load_model, save_model, SelectorModel, MODEL_FORMAT, MODEL_VERSION};
pub use tree::{gini, DecisionTree, Node};

use std::path::PathBuf;

use crate::features::FeatureError;

#[derive(Debug, thiserror::Error)]
pub enum SelectorError {
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("vector has dimension {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("logistic regression did not converge: gradient norm {grad_norm:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, grad_norm: f64 },
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("model file version {found}, expected {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("instance `{instance}` refers to missing table `{table}`")]
    MissingTable { instance: String, table: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<(), SelectorError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(SelectorError::DimensionMismatch {
            expected,
            found: v.len(),
        })
    }
}

/// Per-feature mean and scale learned from training data; constant
/// features get scale 1.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(vectors: &[Vec<f64>]) -> Self {
        let d = vectors.first().map_or(0, Vec::len);
        let n = vectors.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; d];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|s| if s > 1e-24 { s.sqrt() } else { 1.0 })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}
