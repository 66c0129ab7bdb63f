//! EM for a Gaussian mixture whose components have a low-rank precision:
//!
//! ```text
//! Σ_j⁻¹ = (I − V_j U_j)ᵀ (I − V_j U_j) + λ U_jᵀ U_j,   V_j = U_jᵀ
//! ```
//!
//! With orthonormal `U_j` the covariance has eigenvalue `1/λ` on the span of
//! `U_j` and `1` on its complement, so `log det Σ_j = −h log λ`. The
//! Mahalanobis term is exactly the per-cluster TAE cost, which is what ties
//! this EM to the tensorized autoencoder.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::baselines::kmeans::kmeans;
use crate::data::{AssignmentMatrix, DataMatrix};
use crate::error::{check_dim, Result, TaeError};
use crate::linalg::weighted_mean;
use crate::spectral::{scatter, sym_eigen};

/// Mixture component: mean, `h × d` orthonormal basis and mixing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub mean: Array1<f64>,
    pub basis: Array2<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmState {
    pub components: Vec<GmmComponent>,
    pub lambda: f64,
}

/// Which normalizing terms enter the component log-densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityTerms {
    /// The proper Gaussian density, including `−½ log det(2πΣ)`.
    #[default]
    Full,
    /// Drops the determinant term, leaving `log p_j − ½ xᵀΣ⁻¹x`.
    DropDeterminant,
}

/// `xᵀ Σ⁻¹ x = ‖(I − UᵀU) x‖² + λ ‖U x‖²`.
pub fn lowrank_precision_apply(
    x: ArrayView1<'_, f64>,
    basis: ArrayView2<'_, f64>,
    lambda: f64,
) -> f64 {
    let z = basis.dot(&x);
    let residual = &x - &basis.t().dot(&z);
    residual.dot(&residual) + lambda * z.dot(&z)
}

/// The `d × d` precision matrix `(I − UᵀU)ᵀ(I − UᵀU) + λ UᵀU`.
pub fn lowrank_precision_matrix(basis: ArrayView2<'_, f64>, lambda: f64) -> Array2<f64> {
    let d = basis.ncols();
    let p = basis.t().dot(&basis);
    let complement = Array2::<f64>::eye(d) - &p;
    complement.t().dot(&complement) + p * lambda
}

/// The covariance, obtained by inverting the precision through its
/// eigen-decomposition.
pub fn lowrank_covariance(basis: ArrayView2<'_, f64>, lambda: f64) -> Result<Array2<f64>> {
    let eig = sym_eigen(lowrank_precision_matrix(basis, lambda).view())?;
    if eig.values.iter().any(|&v| !(v > 0.0)) {
        return Err(TaeError::InvalidInput(
            "precision matrix is not positive definite".into(),
        ));
    }
    let scaled = &eig.vectors / &eig.values.view().insert_axis(ndarray::Axis(0));
    Ok(scaled.dot(&eig.vectors.t()))
}

fn log_norm(d: usize, h: usize, lambda: f64, terms: DensityTerms) -> f64 {
    match terms {
        DensityTerms::Full => {
            -0.5 * d as f64 * std::f64::consts::TAU.ln() + 0.5 * h as f64 * lambda.ln()
        }
        DensityTerms::DropDeterminant => 0.0,
    }
}

impl GmmState {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `k × n` matrix of `log p_j + log f_j(x_i)`.
    pub fn joint_log_density(&self, x: &DataMatrix, terms: DensityTerms) -> Result<Array2<f64>> {
        let d = x.n_features();
        let mut out = Array2::zeros((self.k(), x.n_samples()));
        for (j, c) in self.components.iter().enumerate() {
            check_dim("features", d, c.mean.len())?;
            let norm = log_norm(d, c.basis.nrows(), self.lambda, terms) + c.weight.ln();
            for (i, row) in x.rows().into_iter().enumerate() {
                let y = &row - &c.mean;
                out[[j, i]] =
                    norm - 0.5 * lowrank_precision_apply(y.view(), c.basis.view(), self.lambda);
            }
        }
        Ok(out)
    }
}

fn log_sum_exp(values: ArrayView1<'_, f64>) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Responsibilities (normalized in log space) and the data log-likelihood.
pub fn gmm_e_step(
    x: &DataMatrix,
    state: &GmmState,
    terms: DensityTerms,
) -> Result<(AssignmentMatrix, f64)> {
    let joint = state.joint_log_density(x, terms)?;
    let mut resp = Array2::zeros(joint.raw_dim());
    let mut log_likelihood = 0.0;
    for (i, col) in joint.columns().into_iter().enumerate() {
        let total = log_sum_exp(col);
        log_likelihood += total;
        let mut r = col.mapv(|v| (v - total).exp());
        r /= r.sum();
        resp.column_mut(i).assign(&r);
    }
    Ok((AssignmentMatrix::new(resp)?, log_likelihood))
}

/// Data log-likelihood under `state`.
pub fn log_likelihood(x: &DataMatrix, state: &GmmState, terms: DensityTerms) -> Result<f64> {
    Ok(gmm_e_step(x, state, terms)?.1)
}

/// Maximizes the expected complete-data log-likelihood within the family:
/// weighted means, top-`h` eigenvectors of the weighted scatter, and mixing
/// weights proportional to the responsibility mass.
pub fn gmm_m_step(x: &DataMatrix, s: &AssignmentMatrix, h: usize, lambda: f64) -> Result<GmmState> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    if h > x.n_features() || h == 0 {
        return Err(TaeError::InvalidInput(format!(
            "latent dimension {h} must be in 1..={}",
            x.n_features()
        )));
    }
    let n = x.n_samples() as f64;
    let mut components = Vec::with_capacity(s.n_clusters());
    for j in 0..s.n_clusters() {
        let view = s.view();
        let weights = view.row(j);
        let mean = weighted_mean(x.view(), weights).ok_or(TaeError::EmptyCluster { cluster: j })?;
        let eig = sym_eigen(scatter(x.view(), weights, mean.view()).view())?;
        components.push(GmmComponent {
            mean,
            basis: eig.top_rows(h),
            weight: weights.sum() / n,
        });
    }
    Ok(GmmState { components, lambda })
}

/// Result of [`fit_gmm`].
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub state: GmmState,
    pub responsibilities: AssignmentMatrix,
    /// Log-likelihood of the initial M-step state, then after every iteration.
    pub log_likelihood_trace: Vec<f64>,
}

impl GmmFit {
    /// Most responsible component per sample, ties to the lowest index.
    pub fn hard_labels(&self) -> Vec<usize> {
        self.responsibilities.hard_labels()
    }
}

/// EM started from a k-means++/Lloyd hard assignment.
pub fn fit_gmm(
    x: &DataMatrix,
    k: usize,
    h: usize,
    lambda: f64,
    iterations: usize,
    seed: u64,
    terms: DensityTerms,
) -> Result<GmmFit> {
    let init = kmeans(x, k, seed)?;
    let s0 = AssignmentMatrix::from_labels(&init.labels, k)?;
    fit_gmm_from(x, &s0, h, lambda, iterations, terms)
}

/// EM from given initial responsibilities.
pub fn fit_gmm_from(
    x: &DataMatrix,
    s0: &AssignmentMatrix,
    h: usize,
    lambda: f64,
    iterations: usize,
    terms: DensityTerms,
) -> Result<GmmFit> {
    if !(lambda > 0.0) {
        return Err(TaeError::InvalidInput(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let mut state = gmm_m_step(x, s0, h, lambda)?;
    let (mut resp, mut ll) = gmm_e_step(x, &state, terms)?;
    let mut trace = vec![ll];
    for _ in 0..iterations {
        state = gmm_m_step(x, &resp, h, lambda)?;
        (resp, ll) = gmm_e_step(x, &state, terms)?;
        if !ll.is_finite() {
            return Err(TaeError::NumericalDivergence { cluster: 0 });
        }
        trace.push(ll);
    }
    Ok(GmmFit {
        state,
        responsibilities: resp,
        log_likelihood_trace: trace,
    })
}
