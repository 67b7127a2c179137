//! Bagged CART ensemble.
//!
//! Bagging uses Poisson(1) row multiplicities derived from a hash of
//! `(seed, tree index, row contents)`, so a tree's bootstrap sample does not
//! depend on row order, row count, or the worker that grows it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_COUNT};
use super::tree::{GrowParams, TrainView, Tree};
use super::LearnError;
use crate::synthetic::LabeledPair;
use crate::streams::{mix64, stream_rng, stream_seed, unit_from_hash, DOMAIN_TREE};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 12, min_samples_leaf: 5, features_per_split: 4, bootstrap: true }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        let checks = [
            ("n_trees", self.n_trees),
            ("max_depth", self.max_depth),
            ("min_samples_leaf", self.min_samples_leaf),
            ("features_per_split", self.features_per_split),
        ];
        for (name, v) in checks {
            if v == 0 {
                return Err(LearnError::Param(format!("{name} must be positive")));
            }
        }
        if self.features_per_split > FEATURE_COUNT {
            return Err(LearnError::Param(format!("features_per_split must be <= {FEATURE_COUNT}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub train_seed: u64,
}

impl Forest {
    /// Mean leaf fraction over trees.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != FEATURE_COUNT {
            return Err(LearnError::Shape { expected: FEATURE_COUNT, found: row.len() });
        }
        let sum: f64 = self.trees.iter().map(|t| t.leaf_fraction(row)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict_many(&self, rows: &[FeatureVector]) -> Vec<f64> {
        rows.par_iter().map(|fv| predict_proba(self, fv)).collect()
    }
}

/// Out-of-bag score per training row: the mean leaf fraction over trees whose
/// bootstrap sample left the row out. Rows that every tree saw (or forests
/// trained without bootstrap) fall back to the full-forest score.
pub fn oob_scores(forest: &Forest, x: &[FeatureVector], y: &[u8]) -> Result<Vec<f64>, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::Shape { expected: x.len(), found: y.len() });
    }
    let rows: Vec<[f64; FEATURE_COUNT]> = x.iter().map(|fv| fv.0).collect();
    let mut sum = vec![0.0; rows.len()];
    let mut count = vec![0u32; rows.len()];
    if forest.params.bootstrap {
        let per_tree: Vec<Vec<(usize, f64)>> = forest
            .trees
            .par_iter()
            .enumerate()
            .map(|(t, tree)| {
                let w = bootstrap_weights(&rows, y, forest.train_seed, t as u64);
                (0..rows.len()).filter(|&i| w[i] == 0).map(|i| (i, tree.leaf_fraction(&rows[i]))).collect()
            })
            .collect();
        for (i, v) in per_tree.into_iter().flatten() {
            sum[i] += v;
            count[i] += 1;
        }
    }
    Ok((0..rows.len())
        .map(|i| if count[i] > 0 { sum[i] / count[i] as f64 } else { predict_proba(forest, &x[i]) })
        .collect())
}

pub fn predict_proba(forest: &Forest, fv: &FeatureVector) -> f64 {
    forest.predict_row(fv.as_slice()).expect("feature vector has fixed length")
}

fn row_fingerprint(x: &[f64; FEATURE_COUNT], y: u8) -> u64 {
    x.iter().fold(mix64(y as u64), |h, v| mix64(h ^ v.to_bits()))
}

/// Poisson(1) draw by inverse CDF.
fn poisson1(u: f64) -> u32 {
    let mut k = 0u32;
    let mut p = (-1.0f64).exp();
    let mut cdf = p;
    while u >= cdf && k < 32 {
        k += 1;
        p /= k as f64;
        cdf += p;
    }
    k
}

pub(crate) fn bootstrap_weights(x: &[[f64; FEATURE_COUNT]], y: &[u8], seed: u64, tree: u64) -> Vec<u32> {
    let tree_key = stream_seed(seed, DOMAIN_TREE, tree);
    x.iter()
        .zip(y)
        .map(|(row, &label)| poisson1(unit_from_hash(mix64(tree_key ^ row_fingerprint(row, label)))))
        .collect()
}

pub(crate) fn check_training_data(x: &[FeatureVector], y: &[u8]) -> Result<(), LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::Shape { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(LearnError::Degenerate("need at least 2 rows".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(LearnError::Degenerate("labels must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(LearnError::Degenerate("training labels contain a single class".into()));
    }
    if x.iter().any(|fv| fv.0.iter().any(|v| !v.is_finite())) {
        return Err(LearnError::Degenerate("non-finite feature value".into()));
    }
    Ok(())
}

/// Grows the forest on the current rayon pool.
pub(crate) fn grow_forest(x: &[FeatureVector], y: &[u8], params: &ForestParams, seed: u64) -> Forest {
    let rows: Vec<[f64; FEATURE_COUNT]> = x.iter().map(|fv| fv.0).collect();
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf as f64,
        features_per_split: params.features_per_split,
    };
    let ones = vec![1u32; rows.len()];
    let trees = (0..params.n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let owned;
            let w: &[u32] = if params.bootstrap {
                owned = bootstrap_weights(&rows, y, seed, t);
                &owned
            } else {
                &ones
            };
            let view = TrainView { x: &rows, y, w };
            let mut rng = stream_rng(seed, DOMAIN_TREE, t);
            Tree::grow(&view, &grow, &mut rng)
        })
        .collect();
    Forest { trees, params: params.clone(), train_seed: seed }
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, LearnError> {
    if workers == 0 {
        return Err(LearnError::Param("workers must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LearnError::Param(e.to_string()))
}

/// Trains on labeled pairs using `workers` threads. The result is identical
/// for every worker count.
pub fn train_forest(pairs: &[LabeledPair], params: &ForestParams, seed: u64, workers: usize) -> Result<Forest, LearnError> {
    let x: Vec<FeatureVector> = pairs.iter().map(|p| p.features).collect();
    let y: Vec<u8> = pairs.iter().map(|p| p.label).collect();
    fit_forest(&x, &y, params, seed, workers)
}

pub fn fit_forest(
    x: &[FeatureVector],
    y: &[u8],
    params: &ForestParams,
    seed: u64,
    workers: usize,
) -> Result<Forest, LearnError> {
    params.validate()?;
    check_training_data(x, y)?;
    let pool = worker_pool(workers)?;
    Ok(pool.install(|| grow_forest(x, y, params, seed)))
}
