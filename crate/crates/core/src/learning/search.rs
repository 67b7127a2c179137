//! Seeded uniform random search over a fixed hyperparameter grid.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{check_training_data, grow_forest, worker_pool};
use super::metrics::{evaluate, EvalReport};
use super::{FeatureVector, ForestParams, LearnError};
use crate::streams::{stream_rng, DOMAIN_SEARCH, DOMAIN_SPLIT};
use crate::synthetic::LabeledPair;

pub struct Grid {
    pub n_trees: &'static [usize],
    pub max_depth: &'static [usize],
    pub min_samples_leaf: &'static [usize],
}

pub const SEARCH_GRID: Grid = Grid { n_trees: &[50, 100, 200], max_depth: &[6, 9, 12, 16], min_samples_leaf: &[2, 5, 10] };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_params: ForestParams,
    pub best_report: EvalReport,
    /// Every trial in sampling order.
    pub trials: Vec<(ForestParams, EvalReport)>,
}

/// Trial `trial`'s configuration, drawn from its own stream.
pub fn sample_params(seed: u64, trial: u64) -> ForestParams {
    let mut rng = stream_rng(seed, DOMAIN_SEARCH, trial);
    let g = &SEARCH_GRID;
    ForestParams {
        n_trees: g.n_trees[rng.random_range(0..g.n_trees.len())],
        max_depth: g.max_depth[rng.random_range(0..g.max_depth.len())],
        min_samples_leaf: g.min_samples_leaf[rng.random_range(0..g.min_samples_leaf.len())],
        ..ForestParams::default()
    }
}

/// Seeded shuffle split into (train, validation) index lists, 80/20.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, DOMAIN_SPLIT, n as u64));
    let n_train = (n * 4).div_ceil(5);
    let val = idx.split_off(n_train);
    (idx, val)
}

pub fn random_search(pairs: &[LabeledPair], budget: usize, seed: u64, workers: usize) -> Result<SearchOutcome, LearnError> {
    if budget == 0 {
        return Err(LearnError::Param("budget must be positive".into()));
    }
    let (train, val) = split_indices(pairs.len(), seed);
    let pick = |ix: &[usize]| -> (Vec<FeatureVector>, Vec<u8>) {
        ix.iter().map(|&i| (pairs[i].features, pairs[i].label)).unzip()
    };
    let (xt, yt) = pick(&train);
    let (xv, yv) = pick(&val);
    check_training_data(&xt, &yt)?;
    if xv.is_empty() {
        return Err(LearnError::Degenerate("validation split is empty".into()));
    }

    let pool = worker_pool(workers)?;
    let trials: Vec<(ForestParams, EvalReport)> = pool.install(|| {
        (0..budget as u64)
            .into_par_iter()
            .map(|t| {
                let params = sample_params(seed, t);
                let forest = grow_forest(&xt, &yt, &params, seed);
                let probs = forest.predict_many(&xv);
                let report = evaluate(&probs, &yv, 0.5).expect("equal lengths");
                (params, report)
            })
            .collect()
    });

    let mut best = 0;
    for (i, (_, r)) in trials.iter().enumerate() {
        if r.f1 > trials[best].1.f1 {
            best = i;
        }
    }
    let (best_params, best_report) = trials[best].clone();
    Ok(SearchOutcome { best_params, best_report, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_a_seeded_partition() {
        let (a, b) = split_indices(101, 5);
        assert_eq!((a.len(), b.len()), (81, 20));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        assert_eq!(split_indices(101, 5), (a, b));
        assert_ne!(split_indices(101, 6).1, split_indices(101, 5).1);
    }

    #[test]
    fn sampled_params_lie_on_grid() {
        for t in 0..50 {
            let p = sample_params(9, t);
            assert!(SEARCH_GRID.n_trees.contains(&p.n_trees));
            assert!(SEARCH_GRID.max_depth.contains(&p.max_depth));
            assert!(SEARCH_GRID.min_samples_leaf.contains(&p.min_samples_leaf));
            p.validate().unwrap();
        }
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(matches!(random_search(&[], 0, 1, 1), Err(LearnError::Param(_))));
    }
}
