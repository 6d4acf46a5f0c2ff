//! Split-quality measures: classification impurities and the regression
//! variance criterion.

use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-9;

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Domain(format!("probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Shannon entropy in bits, with 0 log 0 := 0.
pub fn entropy(class_probs: &[f64]) -> Result<f64> {
    check_probs(class_probs)?;
    Ok(class_probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Gini index, sum p_i (1 - p_i).
pub fn gini(class_probs: &[f64]) -> Result<f64> {
    check_probs(class_probs)?;
    Ok(class_probs.iter().map(|&p| p * (1.0 - p)).sum())
}

/// Parent impurity minus the weighted child impurities.
pub fn information_gain(parent_impurity: f64, children: &[(f64, f64)]) -> Result<f64> {
    let weight_sum: f64 = children.iter().map(|(w, _)| w).sum();
    if (weight_sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Domain(format!("child weights sum to {weight_sum}, expected 1")));
    }
    Ok(parent_impurity - children.iter().map(|(w, e)| w * e).sum::<f64>())
}

/// Population variance of a score vector (divisor n).
pub fn node_variance(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Domain("variance of an empty score vector".into()));
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    Ok(scores.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n)
}

/// Decrease in variance from splitting `parent` into `left` and `right`.
pub fn variance_reduction(parent: &[f64], left: &[f64], right: &[f64]) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::Domain("both children must be non-empty".into()));
    }
    if left.len() + right.len() != parent.len() {
        return Err(Error::Domain("children do not partition the parent".into()));
    }
    let mut combined: Vec<u64> = left.iter().chain(right).map(|y| y.to_bits()).collect();
    let mut orig: Vec<u64> = parent.iter().map(|y| y.to_bits()).collect();
    combined.sort_unstable();
    orig.sort_unstable();
    if combined != orig {
        return Err(Error::Domain("children do not partition the parent".into()));
    }
    let n = parent.len() as f64;
    let wl = left.len() as f64 / n;
    let wr = right.len() as f64 / n;
    Ok(node_variance(parent)? - (wl * node_variance(left)? + wr * node_variance(right)?))
}

/// Mean absolute deviation around the median. Used by the
/// absolute-error split criterion.
pub fn node_abs_deviation(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Domain("deviation of an empty score vector".into()));
    }
    let med = median(scores);
    Ok(scores.iter().map(|y| (y - med).abs()).sum::<f64>() / scores.len() as f64)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
