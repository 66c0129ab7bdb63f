//! k-means++ seeding and Lloyd iterations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::assignment::argmin;
use crate::data::DataMatrix;
use crate::error::{check_dim, Result, TaeError};
use crate::rng::SeededRng;

pub const DEFAULT_MAX_ITER: usize = 300;

/// Centers plus the label of every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansState {
    /// `k × d`, one center per row.
    pub centers: Array2<f64>,
    /// Every label is `< k`.
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares for `labels` and `centers`.
    pub objective: f64,
    /// Objective after each assignment/update pass.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Draws the index of the next center with probability proportional to the
/// squared distance to the nearest of `centers` (D² weighting).
pub fn d2_sample(x: &DataMatrix, centers: ArrayView2<'_, f64>, rng: &mut SeededRng) -> usize {
    let d2: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|row| {
            centers
                .rows()
                .into_iter()
                .map(|c| sq_dist(row, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let total: f64 = d2.iter().sum();
    if !(total > 0.0) {
        log::warn!("all samples coincide with existing centers; choosing uniformly");
        return rng.index(x.n_samples());
    }
    let target = rng.uniform() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &w) in d2.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        cumulative += w;
        if cumulative > target && w > 0.0 {
            return i;
        }
    }
    last_positive
}

/// k-means++ seeding: one uniform draw, then `k − 1` D²-weighted draws.
pub fn kmeans_pp_init(x: &DataMatrix, k: usize, seed: u64) -> Result<Array2<f64>> {
    kmeans_pp_init_with(x, k, &mut SeededRng::new(seed))
}

pub fn kmeans_pp_init_with(x: &DataMatrix, k: usize, rng: &mut SeededRng) -> Result<Array2<f64>> {
    if k == 0 || k > x.n_samples() {
        return Err(TaeError::InvalidInput(format!(
            "k = {k} must be between 1 and the sample count {}",
            x.n_samples()
        )));
    }
    let mut centers = Array2::zeros((k, x.n_features()));
    let first = rng.index(x.n_samples());
    centers.row_mut(0).assign(&x.row(first));
    for c in 1..k {
        let next = d2_sample(x, centers.slice(ndarray::s![..c, ..]), rng);
        centers.row_mut(c).assign(&x.row(next));
    }
    Ok(centers)
}

fn assign(x: &DataMatrix, centers: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    x.rows()
        .into_iter()
        .map(|row| {
            let d: Array1<f64> = centers
                .rows()
                .into_iter()
                .map(|c| sq_dist(row, c))
                .collect();
            let j = argmin(d.view());
            (j, d[j])
        })
        .unzip()
}

/// Lloyd iterations from `centers` until the labels stop changing.
///
/// A cluster that loses all its samples is re-seeded at the sample farthest
/// from its current center.
pub fn kmeans_lloyd(x: &DataMatrix, centers: Array2<f64>, max_iter: usize) -> Result<KMeansState> {
    check_dim("features", x.n_features(), centers.ncols())?;
    let k = centers.nrows();
    if k == 0 || k > x.n_samples() {
        return Err(TaeError::InvalidInput(format!(
            "k = {k} must be between 1 and the sample count {}",
            x.n_samples()
        )));
    }
    let mut centers = centers;
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let (mut new_labels, mut dist) = assign(x, &centers);
        let mut counts = vec![0usize; k];
        for &l in &new_labels {
            counts[l] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            // Only take from clusters that can spare a sample.
            let donor = (0..new_labels.len())
                .filter(|&i| counts[new_labels[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with two or more samples");
            log::debug!("k-means cluster {j} emptied; re-seeding at sample {donor}");
            counts[new_labels[donor]] -= 1;
            counts[j] = 1;
            new_labels[donor] = j;
            dist[donor] = 0.0;
        }
        let converged = new_labels == labels;
        labels = new_labels;
        centers = cluster_means(x, &labels, k);
        trace.push(objective(x, &centers, &labels));
        if converged {
            break;
        }
    }
    Ok(KMeansState {
        objective: *trace.last().expect("at least one iteration"),
        centers,
        labels,
        objective_trace: trace,
        iterations,
    })
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans(x: &DataMatrix, k: usize, seed: u64) -> Result<KMeansState> {
    let centers = kmeans_pp_init(x, k, seed)?;
    kmeans_lloyd(x, centers, DEFAULT_MAX_ITER)
}

pub(crate) fn cluster_means(x: &DataMatrix, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, x.n_features()));
    let mut counts = vec![0usize; k];
    for (row, &l) in x.rows().into_iter().zip(labels) {
        let mut target = sums.row_mut(l);
        target += &row;
        counts[l] += 1;
    }
    for (mut row, &c) in sums.rows_mut().into_iter().zip(&counts) {
        if c > 0 {
            row /= c as f64;
        }
    }
    sums
}

/// Within-cluster sum of squared distances.
pub fn objective(x: &DataMatrix, centers: &Array2<f64>, labels: &[usize]) -> f64 {
    x.rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &l)| sq_dist(row, centers.row(l)))
        .sum()
}
