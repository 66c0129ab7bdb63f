//! Clustering agreement and reconstruction error.

use std::collections::HashMap;

use itertools::Itertools;
use ndarray::{Array2, ArrayView2};

use crate::error::{Result, TaeError};

/// Largest `k` accepted by [`best_label_permutation_accuracy`].
pub const MAX_PERMUTATION_K: usize = 8;

/// Co-occurrence counts of two labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[[a, b]]` samples carry compact label `a` on the left and `b` on the right.
    pub counts: Array2<u64>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let ids = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

impl ContingencyTable {
    pub fn new(left: &[usize], right: &[usize]) -> Result<Self> {
        if left.len() != right.len() {
            return Err(TaeError::DimensionMismatch {
                axis: "labels",
                expected: left.len(),
                found: right.len(),
            });
        }
        let (a, ka) = compact(left);
        let (b, kb) = compact(right);
        let mut counts = Array2::zeros((ka, kb));
        for (&i, &j) in a.iter().zip(&b) {
            counts[[i, j]] += 1;
        }
        let row_sums = counts.rows().into_iter().map(|r| r.sum()).collect();
        let col_sums = counts.columns().into_iter().map(|c| c.sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: left.len() as u64,
        })
    }
}

fn pairs(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand Index of two labelings.
///
/// Two single-cluster labelings are identical partitions and score 1; when
/// only one side is a single cluster the score is 0.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(a, b)?;
    if table.total < 2 {
        return Err(TaeError::InvalidInput(
            "ARI needs at least two samples".into(),
        ));
    }
    let index: f64 = table.counts.iter().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let expected = sum_rows * sum_cols / pairs(table.total);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        // Both sides are one cluster, or both are all singletons.
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Mean squared difference over every entry.
pub fn mse(truth: ArrayView2<'_, f64>, pred: ArrayView2<'_, f64>) -> Result<f64> {
    if truth.dim() != pred.dim() {
        return Err(TaeError::DimensionMismatch {
            axis: if truth.nrows() != pred.nrows() {
                "rows"
            } else {
                "columns"
            },
            expected: if truth.nrows() != pred.nrows() {
                truth.nrows()
            } else {
                truth.ncols()
            },
            found: if truth.nrows() != pred.nrows() {
                pred.nrows()
            } else {
                pred.ncols()
            },
        });
    }
    if truth.is_empty() {
        return Err(TaeError::InvalidInput("mse of empty matrices".into()));
    }
    let total: f64 = truth
        .iter()
        .zip(pred.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(total / truth.len() as f64)
}

/// Best fraction of matching labels over all relabelings of `pred`.
/// Exhaustive, so `k` is capped at [`MAX_PERMUTATION_K`].
pub fn best_label_permutation_accuracy(truth: &[usize], pred: &[usize], k: usize) -> Result<f64> {
    if k > MAX_PERMUTATION_K {
        return Err(TaeError::InvalidInput(format!(
            "k = {k} is too large for exhaustive permutation search; use the adjusted Rand index"
        )));
    }
    if truth.len() != pred.len() {
        return Err(TaeError::DimensionMismatch {
            axis: "labels",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(TaeError::InvalidInput("no labels".into()));
    }
    if let Some(&bad) = truth.iter().chain(pred).find(|&&l| l >= k) {
        return Err(TaeError::InvalidInput(format!(
            "label {bad} is not below k = {k}"
        )));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&t, &p) in truth.iter().zip(pred) {
        counts[p][t] += 1;
    }
    let best = (0..k)
        .permutations(k)
        .map(|perm| (0..k).map(|p| counts[p][perm[p]]).sum::<usize>())
        .max()
        .unwrap_or(0);
    Ok(best as f64 / truth.len() as f64)
}
