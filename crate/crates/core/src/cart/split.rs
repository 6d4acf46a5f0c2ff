//! Optimal split search.
//!
//! Candidate thresholds are midpoints between consecutive distinct
//! sorted values of each candidate feature. Ties between equal-gain
//! splits resolve to the lowest feature index, then lowest threshold
//! (features are scanned ascending and only strict improvements
//! replace the incumbent).

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{Criterion, HyperParams, MaxFeatures, SplitRule};
use crate::data::AuditDataset;

/// Finds the best (feature, threshold) over the candidate set, or
/// `None` when no candidate yields strictly positive gain.
pub fn best_split(
    rows: &[usize],
    dataset: &AuditDataset,
    params: &HyperParams,
    rng: &mut ChaCha8Rng,
) -> Option<(SplitRule, f64)> {
    let p = dataset.n_cols();
    let m = rows.len();
    if m < params.min_samples_split || m < 2 * params.min_samples_leaf {
        return None;
    }

    let mut candidates: Vec<usize> = match params.max_features {
        MaxFeatures::All => (0..p).collect(),
        other => {
            let k = other.count(p);
            let mut picked = sample(rng, p, k).into_vec();
            picked.sort_unstable();
            picked
        }
    };
    candidates.dedup();

    let mut best: Option<(SplitRule, f64)> = None;
    for &feature in &candidates {
        let found = match params.criterion {
            Criterion::SquaredError => best_threshold_squared(rows, dataset, feature, params),
            Criterion::AbsoluteError => best_threshold_absolute(rows, dataset, feature, params),
        };
        if let Some((threshold, gain)) = found {
            let better = match &best {
                None => gain > 0.0,
                Some((_, best_gain)) => gain > *best_gain,
            };
            if better {
                best = Some((SplitRule { feature_index: feature, threshold }, gain));
            }
        }
    }
    best.filter(|(_, g)| *g > 0.0)
}

/// Row order sorted by one feature, with the feature values and scores
/// pulled out for scanning.
fn sorted_by_feature(rows: &[usize], dataset: &AuditDataset, feature: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = rows
        .iter()
        .map(|&i| (dataset.features[i][feature], dataset.scores[i]))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

fn best_threshold_squared(
    rows: &[usize],
    dataset: &AuditDataset,
    feature: usize,
    params: &HyperParams,
) -> Option<(f64, f64)> {
    let (xs, ys) = sorted_by_feature(rows, dataset, feature);
    let m = xs.len();
    let total: f64 = ys.iter().sum();
    let total_sq: f64 = ys.iter().map(|y| y * y).sum();
    let parent_var = (total_sq / m as f64 - (total / m as f64).powi(2)).max(0.0);

    let mut best: Option<(f64, f64)> = None;
    let mut left_sum = 0.0;
    let mut left_sq = 0.0;
    for i in 1..m {
        left_sum += ys[i - 1];
        left_sq += ys[i - 1] * ys[i - 1];
        if xs[i - 1] >= xs[i] {
            continue; // not a boundary between distinct values
        }
        let (nl, nr) = (i, m - i);
        if nl < params.min_samples_leaf || nr < params.min_samples_leaf {
            continue;
        }
        let right_sum = total - left_sum;
        let right_sq = total_sq - left_sq;
        let var_l = (left_sq / nl as f64 - (left_sum / nl as f64).powi(2)).max(0.0);
        let var_r = (right_sq / nr as f64 - (right_sum / nr as f64).powi(2)).max(0.0);
        let gain = parent_var - (nl as f64 / m as f64) * var_l - (nr as f64 / m as f64) * var_r;
        let threshold = 0.5 * (xs[i - 1] + xs[i]);
        let better = match &best {
            None => gain > 0.0,
            Some((_, bg)) => gain > *bg,
        };
        if better {
            best = Some((threshold, gain));
        }
    }
    best
}

fn best_threshold_absolute(
    rows: &[usize],
    dataset: &AuditDataset,
    feature: usize,
    params: &HyperParams,
) -> Option<(f64, f64)> {
    let (xs, ys) = sorted_by_feature(rows, dataset, feature);
    let m = xs.len();
    let parent_dev = super::node_abs_deviation(&ys).unwrap_or(0.0);

    let mut best: Option<(f64, f64)> = None;
    for i in 1..m {
        if xs[i - 1] >= xs[i] {
            continue;
        }
        let (nl, nr) = (i, m - i);
        if nl < params.min_samples_leaf || nr < params.min_samples_leaf {
            continue;
        }
        let dev_l = super::node_abs_deviation(&ys[..i]).unwrap_or(0.0);
        let dev_r = super::node_abs_deviation(&ys[i..]).unwrap_or(0.0);
        let gain = parent_dev - (nl as f64 / m as f64) * dev_l - (nr as f64 / m as f64) * dev_r;
        let threshold = 0.5 * (xs[i - 1] + xs[i]);
        let better = match &best {
            None => gain > 0.0,
            Some((_, bg)) => gain > *bg,
        };
        if better {
            best = Some((threshold, gain));
        }
    }
    best
}
