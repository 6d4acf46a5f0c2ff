//! CART trees: regression fitting (the detection workhorse), the
//! classification variant, cost-complexity pruning, and cross-validated
//! grid search.

pub mod classification;
pub mod export;
mod grid;
mod impurity;
mod prune;
mod split;

pub use grid::grid_search_cv;
pub use impurity::{
    entropy, gini, information_gain, node_abs_deviation, node_variance, variance_reduction,
};
pub use split::best_split;

use serde::{Deserialize, Serialize};

use crate::data::AuditDataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    SquaredError,
    AbsoluteError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Log2,
}

impl MaxFeatures {
    /// Number of candidate features to consider out of `p`.
    pub fn count(self, p: usize) -> usize {
        match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt().ceil() as usize).clamp(1, p),
            MaxFeatures::Log2 => ((p as f64).log2().ceil() as usize).clamp(1, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub ccp_alpha: f64,
    pub max_features: MaxFeatures,
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Domain("max_depth must be positive".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Domain("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Domain("min_samples_leaf must be at least 1".into()));
        }
        if self.ccp_alpha < 0.0 || !self.ccp_alpha.is_finite() {
            return Err(Error::Domain("ccp_alpha must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            criterion: Criterion::SquaredError,
            max_depth: 4,
            min_samples_split: 10,
            min_samples_leaf: 10,
            ccp_alpha: 0.0,
            max_features: MaxFeatures::All,
        }
    }
}

/// Binary split: rows with `X[feature_index] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature_index: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub rule: Option<SplitRule>,
    /// Mean score of the rows in this node.
    pub prediction: f64,
    pub n_samples: usize,
    /// Within-node standard deviation (population form).
    pub dispersion: f64,
    /// Training-row indices reaching this node. May contain duplicates
    /// when the tree was fitted on a bootstrap resample.
    pub sample_indices: Vec<usize>,
    /// (left id, right id) for internal nodes.
    pub children: Option<(usize, usize)>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub hyperparams: HyperParams,
    /// Maximum root-to-leaf edge count.
    pub depth: usize,
    /// Width of the feature matrix the tree was fitted on.
    pub n_features: usize,
}

impl RegressionTree {
    pub fn node(&self, id: usize) -> Result<&TreeNode> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .ok_or_else(|| Error::Lookup(format!("no node with id {id}")))
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id).collect()
    }

    /// Routes a feature vector to its leaf id.
    pub fn leaf_for(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "feature vector has {} entries, tree expects {}",
                x.len(),
                self.n_features
            )));
        }
        let mut cur = self.node(self.root)?;
        while let (Some(rule), Some((l, r))) = (cur.rule, cur.children) {
            let next = if x[rule.feature_index] <= rule.threshold { l } else { r };
            cur = self.node(next)?;
        }
        Ok(cur.id)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.node(self.leaf_for(x)?)?.prediction)
    }

    /// Root-to-node path as (rule, went_left) pairs, excluding the node
    /// itself.
    pub fn path_to(&self, node_id: usize) -> Result<Vec<(SplitRule, bool)>> {
        self.node(node_id)?;
        let mut path = Vec::new();
        if self.walk_path(self.root, node_id, &mut path)? {
            Ok(path)
        } else {
            Err(Error::Lookup(format!("node {node_id} is unreachable from the root")))
        }
    }

    fn walk_path(&self, cur: usize, target: usize, path: &mut Vec<(SplitRule, bool)>) -> Result<bool> {
        if cur == target {
            return Ok(true);
        }
        let node = self.node(cur)?;
        if let (Some(rule), Some((l, r))) = (node.rule, node.children) {
            path.push((rule, true));
            if self.walk_path(l, target, path)? {
                return Ok(true);
            }
            path.pop();
            path.push((rule, false));
            if self.walk_path(r, target, path)? {
                return Ok(true);
            }
            path.pop();
        }
        Ok(false)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Node impurity under the configured criterion.
fn node_impurity(scores: &[f64], criterion: Criterion) -> f64 {
    match criterion {
        Criterion::SquaredError => node_variance(scores).unwrap_or(0.0),
        Criterion::AbsoluteError => node_abs_deviation(scores).unwrap_or(0.0),
    }
}

struct Grower<'a> {
    dataset: &'a AuditDataset,
    params: HyperParams,
    rng: rand_chacha::ChaCha8Rng,
    nodes: Vec<TreeNode>,
    depth: usize,
}

impl<'a> Grower<'a> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let scores: Vec<f64> = rows.iter().map(|&i| self.dataset.scores[i]).collect();
        let prediction = mean(&scores);
        let variance = node_variance(&scores).unwrap_or(0.0);
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            id,
            rule: None,
            prediction,
            n_samples: rows.len(),
            dispersion: variance.sqrt(),
            sample_indices: rows.clone(),
            children: None,
        });
        self.depth = self.depth.max(depth);

        if depth >= self.params.max_depth || rows.len() < self.params.min_samples_split {
            return id;
        }
        let Some((rule, _gain)) = split::best_split(&rows, self.dataset, &self.params, &mut self.rng)
        else {
            return id;
        };

        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &i in &rows {
            if self.dataset.features[i][rule.feature_index] <= rule.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let left_id = self.grow(left, depth + 1);
        let right_id = self.grow(right, depth + 1);
        self.nodes[id].rule = Some(rule);
        self.nodes[id].children = Some((left_id, right_id));
        id
    }
}

/// Fits a regression tree on a subset of dataset rows (duplicates
/// allowed, for bootstrap resamples), then applies cost-complexity
/// pruning at `params.ccp_alpha`.
pub fn fit_rows(
    dataset: &AuditDataset,
    rows: Vec<usize>,
    params: &HyperParams,
    seed: u64,
) -> Result<RegressionTree> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::Domain("cannot fit a tree on zero rows".into()));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= dataset.n_rows()) {
        return Err(Error::Domain(format!("row index {bad} out of range")));
    }
    let mut grower = Grower {
        dataset,
        params: *params,
        rng: rng_from_seed(derive_seed(seed, &[0x51])),
        nodes: Vec::new(),
        depth: 0,
    };
    let root = grower.grow(rows, 0);
    let tree = RegressionTree {
        nodes: grower.nodes,
        root,
        hyperparams: *params,
        depth: grower.depth,
        n_features: dataset.n_cols(),
    };
    prune::prune(&tree, dataset, params.ccp_alpha)
}

/// Fits a regression tree on the full dataset.
pub fn fit(dataset: &AuditDataset, params: &HyperParams, seed: u64) -> Result<RegressionTree> {
    if dataset.n_rows() == 0 {
        return Err(Error::Domain("cannot fit a tree on an empty dataset".into()));
    }
    fit_rows(dataset, (0..dataset.n_rows()).collect(), params, seed)
}

pub use prune::prune;
