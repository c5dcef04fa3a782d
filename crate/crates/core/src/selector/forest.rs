use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::{check_dim, Label, SelectorError, TrainingSet};

/// Number of features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => d.max(1),
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub dim: usize,
    pub trees: Vec<DecisionTree>,
}

/// Trains a forest on bootstrap resamples. Tree `i` draws from the ChaCha8
/// stream `i` of `seed`, so the model does not depend on thread count.
pub fn train_forest(data: &TrainingSet, params: ForestParams, seed: u64) -> Result<ForestModel, SelectorError> {
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(SelectorError::InvalidParams("n_trees and min_leaf must be positive".into()));
    }
    data.require_classes(2)?;
    let n = data.len();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        max_features: params.max_features.resolve(data.dim()),
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            DecisionTree::fit(&data.vectors, &data.labels, sample, tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        params,
        seed,
        dim: data.dim(),
        trees,
    })
}

impl ForestModel {
    /// Fraction of trees voting SQL_CORRECT.
    pub fn score(&self, v: &[f64]) -> Result<f64, SelectorError> {
        check_dim(self.dim, v)?;
        let sql = self.trees.iter().filter(|t| t.vote(v) == Label::SqlCorrect).count();
        Ok(sql as f64 / self.trees.len() as f64)
    }

    /// `[P(SQL_CORRECT), P(E2E_CORRECT)]` as tree-vote fractions.
    pub fn predict_proba(&self, v: &[f64]) -> Result<[f64; 2], SelectorError> {
        let s = self.score(v)?;
        Ok([s, 1.0 - s])
    }

    pub fn predict(&self, v: &[f64]) -> Result<(Label, f64), SelectorError> {
        let s = self.score(v)?;
        Ok((Label::from_score(s), s))
    }
}
