//! Spectral machinery used to check trained models against the closed-form
//! optimum: weighted scatter matrices, a cyclic Jacobi eigensolver, principal
//! angles between subspaces, and the per-cluster optimality report.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{AssignmentMatrix, DataMatrix};
use crate::error::{check_dim, Result, TaeError};
use crate::linalg::{frobenius, orthonormality_residual, weighted_mean};
use crate::linear::TaeModel;

const MAX_SWEEPS: usize = 100;

/// `Σ_i S[j,i] (X_i − c)(X_i − c)ᵀ`.
pub fn weighted_covariance(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    center: ArrayView1<'_, f64>,
    cluster: usize,
) -> Result<Array2<f64>> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    check_dim("features", x.n_features(), center.len())?;
    if cluster >= s.n_clusters() {
        return Err(TaeError::InvalidInput(format!(
            "cluster {cluster} out of range for k = {}",
            s.n_clusters()
        )));
    }
    Ok(scatter(x.view(), s.view().row(cluster), center))
}

pub(crate) fn scatter(
    x: ArrayView2<'_, f64>,
    weights: ArrayView1<'_, f64>,
    center: ArrayView1<'_, f64>,
) -> Array2<f64> {
    let d = x.ncols();
    let mut centered = x.to_owned();
    for (mut row, &w) in centered.axis_iter_mut(Axis(0)).zip(weights.iter()) {
        row -= &center;
        row *= w.sqrt();
    }
    let mut cov = centered.t().dot(&centered);
    // Exact symmetry regardless of summation order.
    for a in 0..d {
        for b in (a + 1)..d {
            let v = 0.5 * (cov[[a, b]] + cov[[b, a]]);
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }
    cov
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Eigenvalues in descending order.
    pub values: Array1<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Array2<f64>,
}

impl SymEigen {
    /// The leading `h` eigenvectors stacked as rows (`h × d`).
    pub fn top_rows(&self, h: usize) -> Array2<f64> {
        self.vectors.slice(ndarray::s![.., ..h]).t().to_owned()
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Each eigenvector's largest-magnitude component is made positive so the
/// output is deterministic.
pub fn sym_eigen(a: ArrayView2<'_, f64>) -> Result<SymEigen> {
    let n = a.nrows();
    check_dim("columns", n, a.ncols())?;
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    if asym > 1e-9 * scale.max(1.0) {
        return Err(TaeError::NotSymmetric { asymmetry: asym });
    }

    let mut m = a.to_owned();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let total = frobenius(m.view());

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = v.select(Axis(1), &order);
    for mut col in vectors.columns_mut() {
        let lead = col.iter().copied().fold(
            0.0_f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        if lead < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Largest principal angle (radians) between the row spans of two `h × d`
/// matrices. Zero iff the spans coincide.
pub fn principal_angle(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<f64> {
    check_dim("latent rows", a.nrows(), b.nrows())?;
    check_dim("features", a.ncols(), b.ncols())?;
    let qa = crate::linalg::orthonormalize_rows(a)?;
    let qb = crate::linalg::orthonormalize_rows(b)?;
    let cross = qa.dot(&qb.t());
    // Component of each row of qa lying outside span(qb).
    let outside = &qa - &cross.dot(&qb);
    let cos_sq = sym_eigen(cross.dot(&cross.t()).view())?;
    let sin_sq = sym_eigen(outside.dot(&outside.t()).view())?;
    let h = cross.nrows();
    let cos_min = cos_sq.values[h - 1].max(0.0).sqrt();
    let sin_max = sin_sq.values[0].max(0.0).sqrt();
    Ok(sin_max.atan2(cos_min))
}

/// Pass thresholds for [`verify_optimality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyThresholds {
    pub s_binariness: f64,
    pub center_residual: f64,
    pub tie_residual: f64,
    pub orthonormality_residual: f64,
    pub subspace_angle: f64,
}

impl Default for VerifyThresholds {
    fn default() -> Self {
        Self {
            s_binariness: 1e-3,
            center_residual: 1e-5,
            tie_residual: 0.0,
            orthonormality_residual: 1e-2,
            subspace_angle: 0.05,
        }
    }
}

/// Optimality residuals of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster: usize,
    pub mass: f64,
    /// Largest distance of any entry of this cluster's assignment row from {0, 1}.
    pub s_binariness: f64,
    /// Distance between the stored center and the weighted mean of the cluster.
    pub center_residual: f64,
    /// `‖V − Uᵀ‖_F`.
    pub tie_residual: f64,
    /// `‖U Uᵀ − I‖_F`.
    pub orthonormality_residual: f64,
    /// Largest principal angle between `U` and the top eigenvectors of the
    /// cluster scatter matrix, in radians.
    pub subspace_angle: f64,
    /// Scatter-matrix eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub clusters: Vec<ClusterReport>,
    pub thresholds: VerifyThresholds,
    pub pass: bool,
}

/// Checks a trained linear model against the closed-form optimum: binary
/// assignments, centers at the weighted means, tied and orthonormal weights,
/// and encoders spanning the top eigenvectors of each cluster's scatter.
///
/// Clusters without mass are reported but do not affect `pass`.
pub fn verify_optimality(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TaeModel,
) -> Result<SpectralReport> {
    verify_optimality_with(x, s, model, VerifyThresholds::default())
}

pub fn verify_optimality_with(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TaeModel,
    thresholds: VerifyThresholds,
) -> Result<SpectralReport> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    check_dim("clusters", model.k(), s.n_clusters())?;
    check_dim("features", model.input_dim(), x.n_features())?;
    let h = model.latent_dim();
    let mut clusters = Vec::with_capacity(model.k());
    for (j, ae) in model.clusters().iter().enumerate() {
        let weights = s.view().row(j).to_owned();
        let mass = weights.sum();
        let s_binariness = weights
            .iter()
            .map(|&w| w.abs().min((1.0 - w).abs()))
            .fold(0.0, f64::max);
        let tie_residual = frobenius((&ae.decoder - &ae.encoder.t()).view());
        let orthonormality = orthonormality_residual(ae.encoder.view());
        let cov = scatter(x.view(), weights.view(), ae.center.view());
        let eig = sym_eigen(cov.view())?;
        let (center_residual, subspace_angle) = match weighted_mean(x.view(), weights.view()) {
            Some(mean) => {
                let diff = &ae.center - &mean;
                let angle = principal_angle(ae.encoder.view(), eig.top_rows(h).view())
                    .unwrap_or(std::f64::consts::FRAC_PI_2);
                (diff.dot(&diff).sqrt(), angle)
            }
            None => (0.0, 0.0),
        };
        let pass = mass <= 0.0
            || (s_binariness < thresholds.s_binariness
                && center_residual < thresholds.center_residual
                && tie_residual <= thresholds.tie_residual
                && orthonormality < thresholds.orthonormality_residual
                && subspace_angle < thresholds.subspace_angle);
        clusters.push(ClusterReport {
            cluster: j,
            mass,
            s_binariness,
            center_residual,
            tie_residual,
            orthonormality_residual: orthonormality,
            subspace_angle,
            eigenvalues: eig.values.to_vec(),
            pass,
        });
    }
    let pass = clusters.iter().all(|c| c.pass);
    Ok(SpectralReport {
        clusters,
        thresholds,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn covariance_of_symmetric_pair() {
        let x = DataMatrix::new(array![[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0, 0], 1).unwrap();
        let cov = weighted_covariance(&x, &s, array![0.0, 0.0].view(), 0).unwrap();
        assert_eq!(cov, array![[2.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn covariance_zero_weights() {
        let x = DataMatrix::new(array![[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[1, 1], 2).unwrap();
        let cov = weighted_covariance(&x, &s, array![0.5, 0.5].view(), 0).unwrap();
        assert_eq!(cov, Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn eigen_of_diagonal() {
        let e = sym_eigen(array![[1.0, 0.0], [0.0, 3.0]].view()).unwrap();
        assert_eq!(e.values.to_vec(), vec![3.0, 1.0]);
        assert_abs_diff_eq!(e.vectors[[1, 0]].abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.vectors[[0, 1]].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eigen_of_two_by_two() {
        // Characteristic polynomial (2 - t)^2 - 1 has roots 3 and 1.
        let e = sym_eigen(array![[2.0, 1.0], [1.0, 2.0]].view()).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[[0, 0]].abs(), FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[[1, 0]].abs(), FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[[0, 1]] * e.vectors[[1, 1]], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        assert!(matches!(
            sym_eigen(array![[1.0, 2.0], [0.0, 1.0]].view()),
            Err(TaeError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn angles_in_the_plane() {
        let e1 = array![[1.0, 0.0]];
        let e2 = array![[0.0, 1.0]];
        let diag = array![[FRAC_1_SQRT_2, FRAC_1_SQRT_2]];
        assert_eq!(principal_angle(e1.view(), e1.view()).unwrap(), 0.0);
        assert_abs_diff_eq!(
            principal_angle(e1.view(), e2.view()).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            principal_angle(diag.view(), e1.view()).unwrap(),
            FRAC_PI_4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn angle_is_basis_invariant() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = array![[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]];
        assert!(principal_angle(a.view(), b.view()).unwrap() < 1e-15);
    }

    #[test]
    fn angle_rejects_rank_deficient() {
        let a = array![[1.0, 0.0], [2.0, 0.0]];
        let b = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            principal_angle(a.view(), b.view()),
            Err(TaeError::RankDeficient { .. })
        ));
    }
}
