//! Bagged forests of Gini trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};
use super::{ClassifyError, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub tree_count: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means ⌈√d⌉.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            tree_count: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
    pub(crate) n_classes: usize,
    pub(crate) n_features: usize,
}

pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let d = x.first().ok_or(ClassifyError::EmptyInput)?.len();
    if d == 0 {
        return Err(ClassifyError::EmptyInput);
    }
    for row in x {
        if row.len() != d {
            return Err(ClassifyError::DimensionMismatch { expected: d, found: row.len() });
        }
    }
    Ok(d)
}

/// Fit a forest on rows `x` with class indices `y` in `0..K`.
pub fn train_forest(x: &[Vec<f64>], y: &[usize], config: &ForestConfig) -> Result<Forest> {
    let d = check_matrix(x)?;
    if y.len() != x.len() {
        return Err(ClassifyError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    for &k in y {
        seen[k] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(ClassifyError::SingleClass);
    }
    if config.tree_count == 0 || config.min_samples_split < 2 || config.features_per_split == Some(0) {
        return Err(ClassifyError::InvalidConfig);
    }
    let params = TreeParams {
        n_classes,
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        features_per_split: config
            .features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .min(d),
    };
    let n = x.len();
    let trees = (0..config.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(config.seed, &[t as u64]);
            let samples: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            Tree::fit(x, y, samples, &params, &mut rng)
        })
        .collect();
    Ok(Forest { trees, n_classes, n_features: d })
}

impl Forest {
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.n_features {
            return Err(ClassifyError::DimensionMismatch { expected: self.n_features, found: row.len() });
        }
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        let mut best = 0;
        for k in 1..votes.len() {
            if votes[k] > votes[best] {
                best = k;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.iter().map(|r| self.predict_row(r)).collect()
    }

    /// Mean decrease in Gini impurity per feature, normalized to sum 1.
    pub fn feature_importance(&self) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.n_features];
        for t in &self.trees {
            let gains = t.gains(self.n_features);
            let s: f64 = gains.iter().sum();
            if s > 0.0 {
                for (acc, g) in total.iter_mut().zip(gains) {
                    *acc += g / s;
                }
            }
        }
        let s: f64 = total.iter().sum();
        if s <= 0.0 {
            return Err(ClassifyError::NoSplits);
        }
        Ok(total.into_iter().map(|v| v / s).collect())
    }
}
