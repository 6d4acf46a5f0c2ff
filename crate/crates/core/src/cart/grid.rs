//! Cross-validated hyperparameter grid search.
//!
//! Folds are contiguous blocks of the (already shuffled) dataset, so
//! the whole procedure is reproducible from the seed alone. Grid points
//! are scored by mean held-out squared error; ties keep the earliest
//! grid point.

use rayon::prelude::*;

use super::{fit_rows, HyperParams};
use crate::data::AuditDataset;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

fn fold_bounds(n: usize, folds: usize, f: usize) -> (usize, usize) {
    (f * n / folds, (f + 1) * n / folds)
}

fn cv_error(dataset: &AuditDataset, params: &HyperParams, folds: usize, seed: u64) -> Result<f64> {
    let n = dataset.n_rows();
    let mut total = 0.0;
    for f in 0..folds {
        let (lo, hi) = fold_bounds(n, folds, f);
        let train: Vec<usize> = (0..n).filter(|i| *i < lo || *i >= hi).collect();
        let tree = fit_rows(dataset, train, params, derive_seed(seed, &[f as u64]))?;
        let mut sq = 0.0;
        for i in lo..hi {
            let pred = tree.predict(&dataset.features[i])?;
            let err = dataset.scores[i] - pred;
            sq += err * err;
        }
        total += sq / (hi - lo) as f64;
    }
    Ok(total / folds as f64)
}

/// Returns the grid point with minimal mean held-out squared error.
pub fn grid_search_cv(
    dataset: &AuditDataset,
    grid: &[HyperParams],
    folds: usize,
    seed: u64,
) -> Result<HyperParams> {
    if grid.is_empty() {
        return Err(Error::Domain("hyperparameter grid is empty".into()));
    }
    if folds < 2 {
        return Err(Error::Domain("cross-validation needs at least 2 folds".into()));
    }
    if dataset.n_rows() < folds {
        return Err(Error::Domain(format!(
            "{} rows cannot be split into {folds} folds",
            dataset.n_rows()
        )));
    }

    let errors: Vec<Result<f64>> = grid
        .par_iter()
        .enumerate()
        .map(|(gi, params)| cv_error(dataset, params, folds, derive_seed(seed, &[gi as u64])))
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (gi, err) in errors.into_iter().enumerate() {
        let err = err?;
        let better = match best {
            None => true,
            Some((_, be)) => err < be,
        };
        if better {
            best = Some((gi, err));
        }
    }
    Ok(grid[best.unwrap().0])
}

#[cfg(test)]
mod tests {
    use super::super::test_util::dataset_1d;
    use super::*;
    use crate::cart::HyperParams;

    fn step_data() -> crate::data::AuditDataset {
        // noise-free step function, learnable exactly at depth 1
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| if x < 20.0 { 0.0 } else { 1.0 }).collect();
        dataset_1d(&xs, &ys)
    }

    fn with_depth(d: usize) -> HyperParams {
        HyperParams {
            max_depth: d,
            min_samples_split: 2,
            min_samples_leaf: 1,
            ..HyperParams::default()
        }
    }

    #[test]
    fn singleton_grid_returns_it() {
        let grid = vec![with_depth(2)];
        let picked = grid_search_cv(&step_data(), &grid, 5, 0).unwrap();
        assert_eq!(picked, grid[0]);
    }

    #[test]
    fn ties_keep_declaration_order() {
        let grid = vec![with_depth(3), with_depth(3)];
        let picked = grid_search_cv(&step_data(), &grid, 5, 0).unwrap();
        assert_eq!(picked, grid[0]);
    }

    #[test]
    fn equal_error_grid_points_tie_break_to_first() {
        // both depths fit the noise-free step exactly, so errors tie
        let grid = vec![with_depth(1), with_depth(3)];
        let picked = grid_search_cv(&step_data(), &grid, 5, 0).unwrap();
        assert_eq!(picked.max_depth, 1);
    }

    #[test]
    fn rejects_empty_grid_and_bad_folds() {
        assert!(grid_search_cv(&step_data(), &[], 5, 0).is_err());
        assert!(grid_search_cv(&step_data(), &[with_depth(1)], 1, 0).is_err());
    }

    #[test]
    fn is_deterministic() {
        let grid = vec![with_depth(1), with_depth(2), with_depth(4)];
        let a = grid_search_cv(&step_data(), &grid, 5, 13).unwrap();
        let b = grid_search_cv(&step_data(), &grid, 5, 13).unwrap();
        assert_eq!(a, b);
    }
}
