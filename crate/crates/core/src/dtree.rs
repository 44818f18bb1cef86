//! From-scratch CART binary classifier for the layer-1 anomaly gate.
//!
//! Gini impurity, exhaustive midpoint thresholds, `<=`-goes-left. Leaves
//! predict the majority class; ties resolve to label 1 so ambiguity falls
//! through to layer 2 rather than silently allowing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::scalar::Scalar;

pub const FEATURE_COUNT: usize = 4;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("cannot compute impurity of an empty node")]
    EmptyNode,
    #[error("cannot fit a tree on an empty dataset")]
    EmptyDataset,
    #[error("label {0} is not binary (expected 0 or 1)")]
    InvalidLabel(u8),
    #[error("invalid tree config: {0}")]
    InvalidConfig(String),
}

/// Training configuration. The split criterion is always Gini.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows without a depth bound.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Shuffles row order before growth. Exhaustive splitting makes the
    /// result order-independent; the shuffle just pins iteration order.
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: Some(12),
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl TreeConfig {
    fn validate(&self) -> Result<(), TreeError> {
        if self.min_samples_split < 2 {
            return Err(TreeError::InvalidConfig("min_samples_split must be >= 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(TreeError::InvalidConfig("min_samples_leaf must be >= 1".into()));
        }
        if self.min_samples_leaf > self.min_samples_split {
            return Err(TreeError::InvalidConfig(
                "min_samples_leaf must not exceed min_samples_split".into(),
            ));
        }
        Ok(())
    }
}

/// A tree node: an internal split (`<=` left, `>` right) or a leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[serde(bound = "")]
pub enum TreeNode<F: Scalar> {
    Split {
        feature: usize,
        threshold: F,
        left: Box<TreeNode<F>>,
        right: Box<TreeNode<F>>,
    },
    Leaf {
        label: u8,
        /// Training sample counts per class at this leaf: (label 0, label 1).
        counts: [usize; 2],
    },
}

impl<F: Scalar> TreeNode<F> {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Trained layer-1 anomaly classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecisionTree<F: Scalar> {
    pub root: TreeNode<F>,
    pub config: TreeConfig,
    pub feature_names: Vec<String>,
    /// Training sample counts per class: (label 0, label 1).
    pub class_counts: [usize; 2],
}

/// Gini impurity `1 - p0^2 - p1^2` of a binary label multiset.
pub fn gini<F: Scalar>(labels: &[u8]) -> Result<F, TreeError> {
    if labels.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    Ok(gini_counts([labels.len() - ones, ones]))
}

fn gini_counts<F: Scalar>(counts: [usize; 2]) -> F {
    let total = counts[0] + counts[1];
    if total == 0 {
        return F::zero();
    }
    let p0 = F::from_count(counts[0]) / F::from_count(total);
    let p1 = F::from_count(counts[1]) / F::from_count(total);
    F::one() - p0 * p0 - p1 * p1
}

/// A candidate split chosen by [`best_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<F: Scalar> {
    pub feature: usize,
    pub threshold: F,
    pub weighted_gini: F,
}

/// Exhaustively evaluates midpoints between consecutive distinct sorted
/// values of every feature and returns the split minimizing the weighted
/// child Gini. Ties break toward the lower feature index, then the lower
/// threshold. Returns `None` when no split strictly reduces impurity or
/// every candidate would leave a side below `min_samples_leaf`.
pub fn best_split<F: Scalar>(rows: &[([F; 4], u8)], min_samples_leaf: usize) -> Option<Split<F>> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let total_ones = rows.iter().filter(|(_, y)| *y == 1).count();
    let parent = gini_counts::<F>([n - total_ones, total_ones]);
    let n_f = F::from_count(n);

    let mut best: Option<Split<F>> = None;
    let mut column: Vec<(F, u8)> = Vec::with_capacity(n);
    for feature in 0..FEATURE_COUNT {
        column.clear();
        column.extend(rows.iter().map(|(fv, y)| (fv[feature], *y)));
        column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("feature values are finite"));

        let mut left = [0usize; 2];
        let mut right = [n - total_ones, total_ones];
        for i in 0..n - 1 {
            let (value, label) = column[i];
            left[label as usize] += 1;
            right[label as usize] -= 1;
            let next_value = column[i + 1].0;
            if next_value <= value {
                continue; // not a boundary between distinct values
            }
            let left_n = i + 1;
            let right_n = n - left_n;
            if left_n < min_samples_leaf || right_n < min_samples_leaf {
                continue;
            }
            let two = F::of(2.0);
            let threshold = (value + next_value) / two;
            let weighted = (F::from_count(left_n) * gini_counts::<F>(left)
                + F::from_count(right_n) * gini_counts::<F>(right))
                / n_f;
            let better = match &best {
                None => true,
                Some(b) => weighted < b.weighted_gini,
            };
            if better {
                best = Some(Split {
                    feature,
                    threshold,
                    weighted_gini: weighted,
                });
            }
        }
    }

    // Require a strict impurity reduction (beyond float noise).
    best.filter(|b| b.weighted_gini < parent - F::of(1e-12))
}

fn leaf<F: Scalar>(counts: [usize; 2]) -> TreeNode<F> {
    // Majority label; ties fail toward anomaly (label 1) so layer 2 arbitrates.
    let label = if counts[1] >= counts[0] { 1 } else { 0 };
    TreeNode::Leaf { label, counts }
}

fn grow<F: Scalar>(rows: Vec<([F; 4], u8)>, depth: usize, config: &TreeConfig) -> TreeNode<F> {
    let ones = rows.iter().filter(|(_, y)| *y == 1).count();
    let counts = [rows.len() - ones, ones];
    let at_depth_cap = config.max_depth.is_some_and(|d| depth >= d);
    if ones == 0 || ones == rows.len() || at_depth_cap || rows.len() < config.min_samples_split {
        return leaf(counts);
    }
    let Some(split) = best_split(&rows, config.min_samples_leaf) else {
        return leaf(counts);
    };
    let (left_rows, right_rows): (Vec<_>, Vec<_>) =
        rows.into_iter().partition(|(fv, _)| fv[split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(left_rows, depth + 1, config)),
        right: Box::new(grow(right_rows, depth + 1, config)),
    }
}

impl<F: Scalar> DecisionTree<F> {
    pub fn fit(
        data: &[(FeatureVector<F>, u8)],
        config: TreeConfig,
    ) -> Result<DecisionTree<F>, TreeError> {
        config.validate()?;
        if data.is_empty() {
            return Err(TreeError::EmptyDataset);
        }
        if let Some(&(_, y)) = data.iter().find(|(_, y)| *y > 1) {
            return Err(TreeError::InvalidLabel(y));
        }
        let mut rows: Vec<([F; 4], u8)> =
            data.iter().map(|(fv, y)| (fv.as_array(), *y)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rows.shuffle(&mut rng);

        let ones = rows.iter().filter(|(_, y)| *y == 1).count();
        let class_counts = [rows.len() - ones, ones];
        let root = grow(rows, 0, &config);
        Ok(DecisionTree {
            root,
            config,
            feature_names: FeatureVector::<F>::NAMES.iter().map(|s| s.to_string()).collect(),
            class_counts,
        })
    }

    pub fn predict(&self, fv: &FeatureVector<F>) -> u8 {
        let values = fv.as_array();
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if values[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}
