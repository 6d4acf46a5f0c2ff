//! Classification trees with impurity-based splitting and
//! majority-label leaves. Not part of the bias-detection pipeline; the
//! pipeline runs on regression trees only.

use serde::{Deserialize, Serialize};

use super::impurity::{entropy, gini};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassCriterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub criterion: ClassCriterion,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for ClassParams {
    fn default() -> Self {
        Self {
            criterion: ClassCriterion::Gini,
            max_depth: 4,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassNode {
    pub rule: Option<super::SplitRule>,
    /// Majority label among the rows in this node.
    pub label: usize,
    pub n_samples: usize,
    pub children: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTree {
    pub nodes: Vec<ClassNode>,
    pub root: usize,
    pub n_features: usize,
    n_classes: usize,
}

fn class_probs(labels: &[usize], rows: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &i in rows {
        counts[labels[i]] += 1;
    }
    counts.iter().map(|&c| c as f64 / rows.len() as f64).collect()
}

fn impurity(probs: &[f64], criterion: ClassCriterion) -> f64 {
    match criterion {
        ClassCriterion::Gini => gini(probs).unwrap_or(0.0),
        ClassCriterion::Entropy => entropy(probs).unwrap_or(0.0),
    }
}

fn majority(labels: &[usize], rows: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in rows {
        counts[labels[i]] += 1;
    }
    counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(k, _)| k)
        .unwrap_or(0)
}

struct Builder<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    params: ClassParams,
    nodes: Vec<ClassNode>,
}

impl<'a> Builder<'a> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(ClassNode {
            rule: None,
            label: majority(self.labels, &rows, self.n_classes),
            n_samples: rows.len(),
            children: None,
        });
        if depth >= self.params.max_depth || rows.len() < self.params.min_samples_split {
            return id;
        }
        if let Some(rule) = self.best_split(&rows) {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in &rows {
                if self.features[i][rule.feature_index] <= rule.threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            let l = self.grow(left, depth + 1);
            let r = self.grow(right, depth + 1);
            self.nodes[id].rule = Some(rule);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    fn best_split(&self, rows: &[usize]) -> Option<super::SplitRule> {
        let p = self.features[0].len();
        let parent = impurity(&class_probs(self.labels, rows, self.n_classes), self.params.criterion);
        let mut best: Option<(super::SplitRule, f64)> = None;
        for feature in 0..p {
            let mut sorted: Vec<usize> = rows.to_vec();
            sorted.sort_by(|&a, &b| {
                self.features[a][feature]
                    .partial_cmp(&self.features[b][feature])
                    .unwrap()
            });
            for i in 1..sorted.len() {
                let (xa, xb) = (
                    self.features[sorted[i - 1]][feature],
                    self.features[sorted[i]][feature],
                );
                if xa >= xb {
                    continue;
                }
                let (nl, nr) = (i, sorted.len() - i);
                if nl < self.params.min_samples_leaf || nr < self.params.min_samples_leaf {
                    continue;
                }
                let wl = nl as f64 / rows.len() as f64;
                let il = impurity(
                    &class_probs(self.labels, &sorted[..i], self.n_classes),
                    self.params.criterion,
                );
                let ir = impurity(
                    &class_probs(self.labels, &sorted[i..], self.n_classes),
                    self.params.criterion,
                );
                let gain = parent - wl * il - (1.0 - wl) * ir;
                let better = match &best {
                    None => gain > 0.0,
                    Some((_, bg)) => gain > *bg,
                };
                if better {
                    best = Some((
                        super::SplitRule {
                            feature_index: feature,
                            threshold: 0.5 * (xa + xb),
                        },
                        gain,
                    ));
                }
            }
        }
        best.map(|(rule, _)| rule)
    }
}

/// Fits a classification tree over integer class labels.
pub fn fit_classification(
    features: &[Vec<f64>],
    labels: &[usize],
    params: &ClassParams,
) -> Result<ClassificationTree> {
    if features.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Shape("feature and label counts differ".into()));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut builder = Builder {
        features,
        labels,
        n_classes,
        params: *params,
        nodes: Vec::new(),
    };
    let root = builder.grow((0..features.len()).collect(), 0);
    Ok(ClassificationTree {
        nodes: builder.nodes,
        root,
        n_features: features[0].len(),
        n_classes,
    })
}

impl ClassificationTree {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "feature vector has {} entries, tree expects {}",
                x.len(),
                self.n_features
            )));
        }
        let mut cur = &self.nodes[self.root];
        while let (Some(rule), Some((l, r))) = (cur.rule, cur.children) {
            let next = if x[rule.feature_index] <= rule.threshold { l } else { r };
            cur = &self.nodes[next];
        }
        Ok(cur.label)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_labels_classified_exactly() {
        let features: Vec<Vec<f64>> = vec![
            vec![0.0],
            vec![1.0],
            vec![2.0],
            vec![10.0],
            vec![11.0],
            vec![12.0],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1];
        for criterion in [ClassCriterion::Gini, ClassCriterion::Entropy] {
            let tree = fit_classification(
                &features,
                &labels,
                &ClassParams {
                    criterion,
                    ..ClassParams::default()
                },
            )
            .unwrap();
            for (x, &l) in features.iter().zip(&labels) {
                assert_eq!(tree.predict(x).unwrap(), l);
            }
        }
    }

    #[test]
    fn single_class_gives_leaf_root() {
        let features = vec![vec![0.0], vec![1.0]];
        let tree = fit_classification(&features, &[1, 1], &ClassParams::default()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[5.0]).unwrap(), 1);
    }
}
