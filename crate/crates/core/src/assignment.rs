//! Updates of the assignment matrix given a `k × n` matrix of per-point,
//! per-cluster costs. The loss is linear in the assignments, so these are
//! shared by every architecture.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::AssignmentMatrix;
use crate::error::{check_dim, Result};

/// Euclidean projection onto the probability simplex `{s : Σ s = 1, s ≥ 0}`.
///
/// Sort-and-threshold: the largest `ρ` with `u_ρ − (Σ_{r≤ρ} u_r − 1)/ρ > 0`
/// fixes the shift `θ`, and the result is `max(v − θ, 0)`. The input must be
/// finite.
pub fn simplex_project(v: ArrayView1<'_, f64>) -> Array1<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut out = v.mapv(|x| (x - theta).max(0.0));
    let sum = out.sum();
    out /= sum;
    out
}

/// Index of the smallest entry, ties to the lowest index.
pub fn argmin(costs: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (j, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = j;
        }
    }
    best
}

/// Hard assignment of every column to its cheapest cluster.
pub fn lloyd_from_costs(costs: ArrayView2<'_, f64>) -> AssignmentMatrix {
    let mut values = Array2::zeros(costs.raw_dim());
    for (i, col) in costs.columns().into_iter().enumerate() {
        values[[argmin(col), i]] = 1.0;
    }
    AssignmentMatrix::from_raw_unchecked(values)
}

/// One projected gradient step: the gradient of the loss with respect to
/// column `i` is the cost column itself.
pub fn projected_step_from_costs(
    s: &AssignmentMatrix,
    costs: ArrayView2<'_, f64>,
    lr: f64,
) -> Result<AssignmentMatrix> {
    check_dim("clusters", s.n_clusters(), costs.nrows())?;
    check_dim("samples", s.n_samples(), costs.ncols())?;
    let mut values = Array2::zeros(costs.raw_dim());
    for (i, (cost, current)) in costs
        .columns()
        .into_iter()
        .zip(s.view().columns())
        .enumerate()
    {
        let stepped = &current - &(&cost * lr);
        values
            .column_mut(i)
            .assign(&simplex_project(stepped.view()));
    }
    Ok(AssignmentMatrix::from_raw_unchecked(values))
}

/// `Σ_{j,i} S[j,i] · costs[j,i]`.
pub fn weighted_cost(s: &AssignmentMatrix, costs: ArrayView2<'_, f64>) -> f64 {
    (&s.view() * &costs).sum()
}
