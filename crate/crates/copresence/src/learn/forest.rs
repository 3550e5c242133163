//! Random forest over the weighted trees.
//!
//! Each tree gets a bootstrap resample (expressed as integer row weights)
//! and a fresh RNG stream derived from the forest seed and the tree index,
//! so fitting is reproducible no matter how the trees are scheduled across
//! threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::learn::tree::{self, DecisionTree, TreeConfig};
use crate::substream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            tree: TreeConfig {
                max_depth: 12,
                min_leaf: 2,
                mtry: None, // filled per fit from the allowed-feature count
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Mean of the per-tree leaf fractions.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }
}

/// Default features-per-split: ceil(sqrt(p)) over the allowed features.
pub fn default_mtry(allowed: usize) -> usize {
    (allowed as f64).sqrt().ceil() as usize
}

pub fn fit(x: &[&[f64]], y: &[bool], allowed: &[usize], config: &ForestConfig, seed: u64) -> RandomForest {
    assert!(config.trees > 0, "forest needs at least one tree");
    let n = x.len();
    let tree_config = TreeConfig {
        mtry: config.tree.mtry.or(Some(default_mtry(allowed.len()))),
        ..config.tree.clone()
    };
    let trees: Vec<DecisionTree> = (0..config.trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &format!("forest/tree/{i}"));
            // Bootstrap as multiplicity weights: rows drawn zero times drop
            // out, duplicates count double.
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            tree::fit(x, y, &w, allowed, &tree_config, &mut rng)
        })
        .collect();
    RandomForest { trees }
}
