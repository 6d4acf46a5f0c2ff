//! Minimal cost-complexity pruning.
//!
//! Each internal node has an effective alpha: the increase in training
//! risk from collapsing its subtree, per leaf removed. Nodes are
//! collapsed weakest-link first while their effective alpha stays at or
//! below the requested `ccp_alpha`.

use std::collections::HashMap;

use super::{node_abs_deviation, node_variance, Criterion, RegressionTree, TreeNode};
use crate::data::AuditDataset;
use crate::error::Result;

fn node_risk(node: &TreeNode, dataset: &AuditDataset, criterion: Criterion, n_total: usize) -> f64 {
    let ys: Vec<f64> = node.sample_indices.iter().map(|&i| dataset.scores[i]).collect();
    let impurity = match criterion {
        Criterion::SquaredError => node_variance(&ys).unwrap_or(0.0),
        Criterion::AbsoluteError => node_abs_deviation(&ys).unwrap_or(0.0),
    };
    node.n_samples as f64 / n_total as f64 * impurity
}

/// Subtree leaf count and summed leaf risk for every node.
fn subtree_stats(
    nodes: &HashMap<usize, TreeNode>,
    risks: &HashMap<usize, f64>,
    id: usize,
    out: &mut HashMap<usize, (usize, f64)>,
) -> (usize, f64) {
    let node = &nodes[&id];
    let stats = match node.children {
        None => (1, risks[&id]),
        Some((l, r)) => {
            let (ll, lr) = subtree_stats(nodes, risks, l, out);
            let (rl, rr) = subtree_stats(nodes, risks, r, out);
            (ll + rl, lr + rr)
        }
    };
    out.insert(id, stats);
    stats
}

/// Returns a pruned copy of the tree. `ccp_alpha = 0` leaves the tree
/// unchanged (every split has strictly positive gain, so every
/// effective alpha is strictly positive).
pub fn prune(tree: &RegressionTree, dataset: &AuditDataset, ccp_alpha: f64) -> Result<RegressionTree> {
    let n_total = tree.node(tree.root)?.n_samples;
    let mut nodes: HashMap<usize, TreeNode> =
        tree.nodes.iter().map(|n| (n.id, n.clone())).collect();
    let risks: HashMap<usize, f64> = tree
        .nodes
        .iter()
        .map(|n| (n.id, node_risk(n, dataset, tree.hyperparams.criterion, n_total)))
        .collect();

    loop {
        let mut stats = HashMap::new();
        subtree_stats(&nodes, &risks, tree.root, &mut stats);

        // weakest link among reachable internal nodes; ties resolve to
        // the smallest id for determinism
        let mut weakest: Option<(usize, f64)> = None;
        let mut ids: Vec<usize> = stats.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            if nodes[&id].children.is_none() {
                continue;
            }
            let (leaves, leaf_risk) = stats[&id];
            let g = (risks[&id] - leaf_risk) / (leaves as f64 - 1.0);
            let better = match weakest {
                None => true,
                Some((_, wg)) => g < wg,
            };
            if better {
                weakest = Some((id, g));
            }
        }
        match weakest {
            Some((id, g)) if g <= ccp_alpha => {
                let node = nodes.get_mut(&id).unwrap();
                node.rule = None;
                node.children = None;
            }
            _ => break,
        }
    }

    Ok(rebuild(tree, &nodes))
}

/// Renumbers the reachable nodes in preorder and recomputes the depth.
fn rebuild(tree: &RegressionTree, nodes: &HashMap<usize, TreeNode>) -> RegressionTree {
    let mut out = Vec::new();
    let mut depth = 0;
    let root = copy_subtree(nodes, tree.root, 0, &mut out, &mut depth);
    RegressionTree {
        nodes: out,
        root,
        hyperparams: tree.hyperparams,
        depth,
        n_features: tree.n_features,
    }
}

fn copy_subtree(
    nodes: &HashMap<usize, TreeNode>,
    id: usize,
    level: usize,
    out: &mut Vec<TreeNode>,
    depth: &mut usize,
) -> usize {
    *depth = (*depth).max(level);
    let new_id = out.len();
    let mut node = nodes[&id].clone();
    node.id = new_id;
    out.push(node);
    if let Some((l, r)) = nodes[&id].children {
        let nl = copy_subtree(nodes, l, level + 1, out, depth);
        let nr = copy_subtree(nodes, r, level + 1, out, depth);
        out[new_id].children = Some((nl, nr));
    }
    new_id
}
