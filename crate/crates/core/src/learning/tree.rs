//! Axis-aligned binary classification tree grown with the Gini criterion.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { fraction: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Flat node arena; node 0 is the root. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_samples_leaf: f64,
    pub features_per_split: usize,
}

pub(crate) struct TrainView<'a, const D: usize> {
    pub x: &'a [[f64; D]],
    pub y: &'a [u8],
    /// Per-row multiplicity (bootstrap weight).
    pub w: &'a [u32],
}

impl Tree {
    pub fn leaf_fraction(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { fraction } => return *fraction,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { fraction } => Some(*fraction),
            _ => None,
        })
    }

    pub(crate) fn grow<const D: usize>(data: &TrainView<'_, D>, params: &GrowParams, rng: &mut ChaCha8Rng) -> Tree {
        let rows: Vec<u32> = (0..data.x.len() as u32).filter(|&r| data.w[r as usize] > 0).collect();
        let mut tree = Tree { nodes: Vec::new() };
        let mut scratch = Vec::with_capacity(rows.len());
        tree.build(data, params, rng, rows, 0, &mut scratch);
        tree
    }

    fn build<const D: usize>(
        &mut self,
        data: &TrainView<'_, D>,
        params: &GrowParams,
        rng: &mut ChaCha8Rng,
        rows: Vec<u32>,
        depth: usize,
        scratch: &mut Vec<u32>,
    ) -> usize {
        let (total, pos) = weighted_counts(data, &rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { fraction: if total > 0.0 { pos / total } else { 0.0 } });
        let pure = pos == 0.0 || pos == total;
        if pure || depth >= params.max_depth || total < 2.0 * params.min_samples_leaf {
            return id;
        }
        let Some((feature, threshold)) = best_split(data, params, rng, &rows, total, pos, scratch) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.into_iter().partition(|&r| data.x[r as usize][feature] <= threshold);
        let left = self.build(data, params, rng, left_rows, depth + 1, scratch);
        let right = self.build(data, params, rng, right_rows, depth + 1, scratch);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

fn weighted_counts<const D: usize>(data: &TrainView<'_, D>, rows: &[u32]) -> (f64, f64) {
    let (mut total, mut pos) = (0u64, 0u64);
    for &r in rows {
        let w = data.w[r as usize] as u64;
        total += w;
        if data.y[r as usize] == 1 {
            pos += w;
        }
    }
    (total as f64, pos as f64)
}

/// Sum of squared class weights over node weight; larger means purer.
fn purity(pos: f64, total: f64) -> f64 {
    let neg = total - pos;
    (pos * pos + neg * neg) / total
}

/// Best `(feature, threshold)` among a random feature subset, or `None` when
/// no admissible split reduces impurity. Ties go to the lower feature index,
/// then the lower threshold.
fn best_split<const D: usize>(
    data: &TrainView<'_, D>,
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
    rows: &[u32],
    total: f64,
    pos: f64,
    sorted: &mut Vec<u32>,
) -> Option<(usize, f64)> {
    let k = params.features_per_split.clamp(1, D);
    let mut features = sample(rng, D, k).into_vec();
    features.sort_unstable();

    let parent = purity(pos, total);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in features {
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_unstable_by(|&a, &b| data.x[a as usize][f].total_cmp(&data.x[b as usize][f]));
        let (mut wl, mut pl) = (0.0, 0.0);
        for i in 0..sorted.len() - 1 {
            let r = sorted[i] as usize;
            let w = data.w[r] as f64;
            wl += w;
            if data.y[r] == 1 {
                pl += w;
            }
            let a = data.x[r][f];
            let b = data.x[sorted[i + 1] as usize][f];
            if a == b {
                continue;
            }
            let wr = total - wl;
            if wl < params.min_samples_leaf || wr < params.min_samples_leaf {
                continue;
            }
            let score = purity(pl, wl) + purity(pos - pl, wr);
            if score <= parent + 1e-12 {
                continue;
            }
            if best.is_none_or(|(s, _, _)| score > s) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some((score, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}
