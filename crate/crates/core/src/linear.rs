//! Tensorized linear autoencoder with a k-means style latent regularizer.
//!
//! Each of the `k` clusters owns an encoder `U` (`h × d`), a decoder `V`
//! (`d × h`) and a center `C`. A sample `x` costs
//!
//! ```text
//! cost_j(x) = ‖(x − C_j) − V_j U_j (x − C_j)‖² + λ ‖U_j (x − C_j)‖²
//! ```
//!
//! under cluster `j`, and the training loss is the assignment-weighted sum
//! of these costs over all samples and clusters.
//!
//! Training keeps the decoder tied to the encoder (`V = Uᵀ`) and the encoder
//! rows orthonormal: every gradient step is followed by a Gram–Schmidt
//! retraction. Centers are reset to the assignment-weighted means after each
//! weight step, then the assignments are updated either by an exact Lloyd
//! step or by a projected gradient step.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::assignment::{argmin, lloyd_from_costs, projected_step_from_costs, weighted_cost};
use crate::baselines::kmeans::{kmeans_lloyd, kmeans_pp_init_with, DEFAULT_MAX_ITER};
use crate::data::{AssignmentMatrix, DataMatrix};
use crate::error::{check_dim, Result, TaeError};
use crate::linalg::{orthonormalize_rows, random_orthonormal_rows, weighted_mean};
use crate::rng::SeededRng;
use crate::spectral::scatter;

/// How the assignment matrix is updated after each weight step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SUpdate {
    /// Exact minimization over hard assignments.
    #[default]
    Lloyd,
    /// Unconstrained gradient step followed by projection onto the simplex.
    ProjectedGradient,
}

/// Encoder, decoder and center of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLinearAE {
    /// `h × d`.
    pub encoder: Array2<f64>,
    /// `d × h`.
    pub decoder: Array2<f64>,
    /// Length `d`.
    pub center: Array1<f64>,
}

impl ClusterLinearAE {
    /// A cluster whose decoder is the transpose of `encoder`.
    pub fn tied(encoder: Array2<f64>, center: Array1<f64>) -> Self {
        let decoder = encoder.t().to_owned();
        Self {
            encoder,
            decoder,
            center,
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.ncols()
    }

    fn validate(&self) -> Result<()> {
        let (h, d) = self.encoder.dim();
        check_dim("decoder rows", d, self.decoder.nrows())?;
        check_dim("decoder columns", h, self.decoder.ncols())?;
        check_dim("center length", d, self.center.len())?;
        if h > d {
            return Err(TaeError::InvalidInput(format!(
                "latent dimension {h} exceeds input dimension {d}"
            )));
        }
        Ok(())
    }

    /// `U (x − C)`.
    pub fn encode(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.encoder.dot(&(&x - &self.center))
    }

    /// Cost of `x` under this cluster.
    pub fn point_cost(&self, x: ArrayView1<'_, f64>, lambda: f64) -> f64 {
        let y = &x - &self.center;
        let z = self.encoder.dot(&y);
        let residual = &y - &self.decoder.dot(&z);
        residual.dot(&residual) + lambda * z.dot(&z)
    }

    /// `V U (x − C) + C`.
    pub fn project(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.decoder.dot(&self.encode(x)) + &self.center
    }
}

/// A trained (or initialized) tensorized linear autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct TaeModel {
    clusters: Vec<ClusterLinearAE>,
    lambda: f64,
    seed: u64,
    s_update: SUpdate,
}

impl TaeModel {
    pub fn new(
        clusters: Vec<ClusterLinearAE>,
        lambda: f64,
        seed: u64,
        s_update: SUpdate,
    ) -> Result<Self> {
        let first = clusters
            .first()
            .ok_or_else(|| TaeError::InvalidInput("model needs at least one cluster".into()))?;
        let (h, d) = first.encoder.dim();
        for c in &clusters {
            c.validate()?;
            check_dim("latent dimension", h, c.latent_dim())?;
            check_dim("input dimension", d, c.input_dim())?;
        }
        if !lambda.is_finite() {
            return Err(TaeError::InvalidInput(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self {
            clusters,
            lambda,
            seed,
            s_update,
        })
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn input_dim(&self) -> usize {
        self.clusters[0].input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.clusters[0].latent_dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn s_update(&self) -> SUpdate {
        self.s_update
    }

    pub fn clusters(&self) -> &[ClusterLinearAE] {
        &self.clusters
    }

    pub fn cluster(&self, j: usize) -> &ClusterLinearAE {
        &self.clusters[j]
    }

    /// Cluster `j` of the result is cluster `perm[j]` of `self`.
    pub fn permute_clusters(&self, perm: &[usize]) -> Self {
        Self {
            clusters: perm.iter().map(|&p| self.clusters[p].clone()).collect(),
            ..self.clone()
        }
    }

    /// `k × n` matrix of per-sample, per-cluster costs.
    pub fn cost_matrix(&self, x: &DataMatrix) -> Result<Array2<f64>> {
        check_dim("features", self.input_dim(), x.n_features())?;
        let mut costs = Array2::zeros((self.k(), x.n_samples()));
        for (j, ae) in self.clusters.iter().enumerate() {
            let centered = &x.view() - &ae.center.view().insert_axis(Axis(0));
            let latent = centered.dot(&ae.encoder.t());
            let residual = &centered - &latent.dot(&ae.decoder.t());
            let rec = residual.map_axis(Axis(1), |r| r.dot(&r));
            let reg = latent.map_axis(Axis(1), |z| z.dot(&z));
            costs.row_mut(j).assign(&(rec + reg * self.lambda));
        }
        Ok(costs)
    }

    pub(crate) fn cluster_mut(&mut self, j: usize) -> &mut ClusterLinearAE {
        &mut self.clusters[j]
    }
}

fn check_assignment(x: &DataMatrix, s: &AssignmentMatrix, k: usize) -> Result<()> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    check_dim("clusters", k, s.n_clusters())
}

/// Assignment-weighted sum of per-sample costs. Always non-negative.
pub fn tae_loss(x: &DataMatrix, s: &AssignmentMatrix, model: &TaeModel) -> Result<f64> {
    check_assignment(x, s, model.k())?;
    let costs = model.cost_matrix(x)?;
    Ok(weighted_cost(s, costs.view()))
}

/// Weighted mean of the samples under row `j` of the assignments.
pub fn center_update(x: &DataMatrix, s: &AssignmentMatrix, j: usize) -> Result<Array1<f64>> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    if j >= s.n_clusters() {
        return Err(TaeError::InvalidInput(format!(
            "cluster {j} out of range for k = {}",
            s.n_clusters()
        )));
    }
    weighted_mean(x.view(), s.view().row(j)).ok_or(TaeError::EmptyCluster { cluster: j })
}

/// Gradient of the loss with respect to the encoder of cluster `j`, with the
/// decoder tied to the encoder's transpose and the center held fixed.
///
/// With `Σ = Σ_i S[j,i] (X_i − C)(X_i − C)ᵀ` and `P = UᵀU`, the gradient is
/// `2 U ((λ − 2) Σ + P Σ + Σ P)`.
pub fn encoder_gradient(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TaeModel,
    j: usize,
) -> Result<Array2<f64>> {
    check_assignment(x, s, model.k())?;
    check_dim("features", model.input_dim(), x.n_features())?;
    let ae = model.cluster(j);
    let sigma = scatter(x.view(), s.view().row(j), ae.center.view());
    Ok(tied_gradient(&ae.encoder, &sigma, model.lambda))
}

pub(crate) fn tied_gradient(u: &Array2<f64>, sigma: &Array2<f64>, lambda: f64) -> Array2<f64> {
    let p = u.t().dot(u);
    let ps = p.dot(sigma);
    let inner = sigma * (lambda - 2.0) + &ps + ps.t();
    u.dot(&inner) * 2.0
}

/// Gradient of the loss with respect to the assignments: entry `(j, i)` is
/// the cost of sample `i` under cluster `j`.
pub fn assignment_gradient(x: &DataMatrix, model: &TaeModel) -> Result<Array2<f64>> {
    model.cost_matrix(x)
}

/// One full-batch gradient step on every encoder, followed by re-tying the
/// decoders, restoring orthonormal encoder rows and moving every center to
/// its weighted mean.
///
/// `lr` multiplies the gradient of the per-sample mean loss, so the step size
/// does not depend on the number of samples.
pub fn gradient_step_weights(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TaeModel,
    lr: f64,
) -> Result<TaeModel> {
    if !(lr >= 0.0) || !lr.is_finite() {
        return Err(TaeError::InvalidInput(format!(
            "learning rate must be >= 0, got {lr}"
        )));
    }
    check_assignment(x, s, model.k())?;
    check_dim("features", model.input_dim(), x.n_features())?;
    let n = x.n_samples() as f64;
    let mut next = model.clone();
    for j in 0..model.k() {
        let center = center_update(x, s, j)?;
        let grad = encoder_gradient(x, s, model, j)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(TaeError::NumericalDivergence { cluster: j });
        }
        let stepped = &model.cluster(j).encoder - &(grad * (lr / n));
        let encoder = orthonormalize_rows(stepped.view())
            .map_err(|_| TaeError::NumericalDivergence { cluster: j })?;
        *next.cluster_mut(j) = ClusterLinearAE::tied(encoder, center);
    }
    Ok(next)
}

/// Hard assignment of every sample to its cheapest cluster (ties to the
/// lowest index).
pub fn s_update_lloyd(x: &DataMatrix, model: &TaeModel) -> Result<AssignmentMatrix> {
    Ok(lloyd_from_costs(model.cost_matrix(x)?.view()))
}

/// Gradient step on the assignments followed by per-column projection onto
/// the probability simplex.
pub fn s_update_projected_gradient(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TaeModel,
    lr: f64,
) -> Result<AssignmentMatrix> {
    check_assignment(x, s, model.k())?;
    projected_step_from_costs(s, model.cost_matrix(x)?.view(), lr)
}

/// Hyperparameters of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Upper bound on epochs. Zero returns the initialization.
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub latent_dim: usize,
    pub s_update: SUpdate,
    pub seed: u64,
    /// Stop once `|loss_t − loss_{t−1}| < tol · max(1, loss_{t−1})`.
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.05,
            lambda: 0.1,
            latent_dim: 1,
            s_update: SUpdate::Lloyd,
            seed: 0,
            tol: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(TaeError::InvalidInput(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(TaeError::InvalidInput(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        if self.latent_dim == 0 {
            return Err(TaeError::InvalidInput(
                "latent dimension must be >= 1".into(),
            ));
        }
        if !self.lambda.is_finite() {
            return Err(TaeError::InvalidInput(format!(
                "lambda must be finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Logs a warning when `lambda` lies outside `(0, 1]`, where the optimum
    /// is no longer guaranteed to be a hard assignment with eigenvector
    /// encoders. Training still proceeds.
    pub fn warn_on_lambda_range(&self) {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            log::warn!(
                "lambda = {} is outside (0, 1]; the optimum is no longer guaranteed to be binary with eigenvector encoders",
                self.lambda
            );
        }
    }

    pub(crate) fn converged(&self, previous: f64, current: f64) -> bool {
        (current - previous).abs() < self.tol * previous.abs().max(1.0)
    }
}

/// State passed to a training observer after every epoch.
#[derive(Debug)]
pub struct EpochSnapshot<'a> {
    pub epoch: usize,
    pub model: &'a TaeModel,
    pub assignments: &'a AssignmentMatrix,
    pub loss: f64,
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TaeModel,
    pub assignments: AssignmentMatrix,
    /// Loss at initialization followed by the loss after every epoch.
    pub loss_trace: Vec<f64>,
    /// Loss of the returned model and assignments.
    pub final_loss: f64,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Initial assignments and model: k-means++ followed by Lloyd k-means gives
/// the assignments and centers, encoders are random orthonormal rows.
pub fn initialize(
    x: &DataMatrix,
    k: usize,
    config: &TrainConfig,
) -> Result<(TaeModel, AssignmentMatrix)> {
    config.validate()?;
    let (n, d) = (x.n_samples(), x.n_features());
    if k == 0 || k > n {
        return Err(TaeError::InvalidInput(format!(
            "k = {k} must be between 1 and n = {n}"
        )));
    }
    if config.latent_dim > d {
        return Err(TaeError::InvalidInput(format!(
            "latent dimension {} exceeds input dimension {d}",
            config.latent_dim
        )));
    }
    let mut rng = SeededRng::new(config.seed);
    let seeds = kmeans_pp_init_with(x, k, &mut rng)?;
    let state = kmeans_lloyd(x, seeds, DEFAULT_MAX_ITER)?;
    let clusters = state
        .centers
        .rows()
        .into_iter()
        .map(|c| {
            let u = random_orthonormal_rows(config.latent_dim, d, &mut rng);
            ClusterLinearAE::tied(u, c.to_owned())
        })
        .collect();
    let model = TaeModel::new(clusters, config.lambda, config.seed, config.s_update)?;
    let s = AssignmentMatrix::from_labels(&state.labels, k)?;
    Ok((model, s))
}

/// Initializes with [`initialize`] and trains with [`train_from`].
pub fn train(x: &DataMatrix, k: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    let (model, s) = initialize(x, k, config)?;
    train_from(x, s, model, config, &mut |_| {})
}

/// Like [`train`], reporting every epoch to `observer`.
pub fn train_observed(
    x: &DataMatrix,
    k: usize,
    config: &TrainConfig,
    observer: &mut dyn FnMut(&EpochSnapshot<'_>),
) -> Result<TrainOutcome> {
    let (model, s) = initialize(x, k, config)?;
    train_from(x, s, model, config, observer)
}

/// Alternates weight steps and assignment updates from the given starting
/// point until the loss settles or the epoch budget runs out.
pub fn train_from(
    x: &DataMatrix,
    s: AssignmentMatrix,
    model: TaeModel,
    config: &TrainConfig,
    observer: &mut dyn FnMut(&EpochSnapshot<'_>),
) -> Result<TrainOutcome> {
    config.validate()?;
    config.warn_on_lambda_range();
    check_assignment(x, &s, model.k())?;
    check_dim("features", model.input_dim(), x.n_features())?;
    let mut rng = SeededRng::new(config.seed ^ 0x5eed_0fe3_7a11_0001);
    let mut model = TaeModel {
        lambda: config.lambda,
        s_update: config.s_update,
        seed: config.seed,
        ..model
    };
    let mut s = s;
    repair_empty_clusters(x, &mut s, &mut model, &mut rng)?;

    let mut previous = tae_loss(x, &s, &model)?;
    let mut trace = vec![previous];
    let mut converged = false;
    let mut epochs_run = 0;
    for epoch in 0..config.epochs {
        model = gradient_step_weights(x, &s, &model, config.learning_rate)?;
        s = match config.s_update {
            SUpdate::Lloyd => s_update_lloyd(x, &model)?,
            SUpdate::ProjectedGradient => {
                s_update_projected_gradient(x, &s, &model, config.learning_rate)?
            }
        };
        repair_empty_clusters(x, &mut s, &mut model, &mut rng)?;
        let loss = tae_loss(x, &s, &model)?;
        if !loss.is_finite() {
            return Err(TaeError::NumericalDivergence {
                cluster: first_non_finite_cluster(x, &model),
            });
        }
        trace.push(loss);
        epochs_run = epoch + 1;
        observer(&EpochSnapshot {
            epoch,
            model: &model,
            assignments: &s,
            loss,
        });
        if config.converged(previous, loss) {
            converged = true;
            break;
        }
        previous = loss;
    }
    if epochs_run > 0 {
        // Centers lag the last assignment update by one step.
        for j in 0..model.k() {
            if let Ok(center) = center_update(x, &s, j) {
                model.cluster_mut(j).center = center;
            }
        }
    }
    let final_loss = tae_loss(x, &s, &model)?;
    Ok(TrainOutcome {
        model,
        assignments: s,
        loss_trace: trace,
        final_loss,
        epochs_run,
        converged,
    })
}

fn first_non_finite_cluster(x: &DataMatrix, model: &TaeModel) -> usize {
    model
        .cost_matrix(x)
        .ok()
        .and_then(|c| {
            c.rows()
                .into_iter()
                .position(|r| r.iter().any(|v| !v.is_finite()))
        })
        .unwrap_or(0)
}

/// Re-seeds every cluster without mass at the sample with the highest
/// current cost, with a fresh random orthonormal encoder.
fn repair_empty_clusters(
    x: &DataMatrix,
    s: &mut AssignmentMatrix,
    model: &mut TaeModel,
    rng: &mut SeededRng,
) -> Result<()> {
    let k = model.k();
    let mut used = vec![false; x.n_samples()];
    for _ in 0..=k {
        let mass = s.cluster_mass();
        let Some(empty) = mass.iter().position(|&m| m <= 0.0) else {
            return Ok(());
        };
        let costs = model.cost_matrix(x)?;
        let per_sample = (&s.view() * &costs).sum_axis(Axis(0));
        let donor = (0..x.n_samples())
            .filter(|&i| !used[i])
            .max_by(|&a, &b| per_sample[a].total_cmp(&per_sample[b]).then(b.cmp(&a)))
            .ok_or(TaeError::EmptyCluster { cluster: empty })?;
        log::warn!("cluster {empty} is empty; re-seeding at sample {donor}");
        used[donor] = true;
        let h = model.latent_dim();
        let d = model.input_dim();
        *model.cluster_mut(empty) =
            ClusterLinearAE::tied(random_orthonormal_rows(h, d, rng), x.row(donor).to_owned());
        s.set_column_one_hot(donor, empty);
    }
    match s.cluster_mass().iter().position(|&m| m <= 0.0) {
        Some(cluster) => Err(TaeError::EmptyCluster { cluster }),
        None => Ok(()),
    }
}

/// Assigns a new sample to the cluster with the lowest cost. The cost is
/// linear in a soft assignment, so the best vertex of the simplex is optimal.
/// Returns the chosen cluster and the cost under every cluster.
pub fn assign_new_point(x: ArrayView1<'_, f64>, model: &TaeModel) -> Result<(usize, Array1<f64>)> {
    check_dim("features", model.input_dim(), x.len())?;
    let costs: Array1<f64> = model
        .clusters()
        .iter()
        .map(|c| c.point_cost(x, model.lambda()))
        .collect();
    Ok((argmin(costs.view()), costs))
}

/// Which reconstruction of a new sample to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionForm {
    /// `V U (x − C) + C`, the projection onto the cluster's affine subspace.
    #[default]
    Projection,
    /// `(I − V U)(x − C) + C`, the orthogonal-complement form.
    Residual,
}

/// Reconstruction of `x` through its assigned cluster.
pub fn reconstruct(
    x: ArrayView1<'_, f64>,
    model: &TaeModel,
    form: ReconstructionForm,
) -> Result<Array1<f64>> {
    let (j, _) = assign_new_point(x, model)?;
    let ae = model.cluster(j);
    Ok(match form {
        ReconstructionForm::Projection => ae.project(x),
        ReconstructionForm::Residual => {
            let y = &x - &ae.center;
            &y - &ae.decoder.dot(&ae.encoder.dot(&y)) + &ae.center
        }
    })
}

/// Reconstructs every row of `x`.
pub fn reconstruct_all(
    x: &DataMatrix,
    model: &TaeModel,
    form: ReconstructionForm,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((x.n_samples(), x.n_features()));
    for (i, row) in x.rows().into_iter().enumerate() {
        out.row_mut(i).assign(&reconstruct(row, model, form)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit_model(lambda: f64) -> TaeModel {
        TaeModel::new(
            vec![ClusterLinearAE::tied(array![[1.0, 0.0]], array![0.0, 0.0])],
            lambda,
            0,
            SUpdate::Lloyd,
        )
        .unwrap()
    }

    fn single(x: [f64; 2]) -> (DataMatrix, AssignmentMatrix) {
        (
            DataMatrix::new(array![[x[0], x[1]]]).unwrap(),
            AssignmentMatrix::from_labels(&[0], 1).unwrap(),
        )
    }

    #[test]
    fn loss_of_reconstructed_point_is_regularizer() {
        let (x, s) = single([1.0, 0.0]);
        assert_eq!(tae_loss(&x, &s, &unit_model(0.5)).unwrap(), 0.5);
    }

    #[test]
    fn loss_of_orthogonal_point_is_residual() {
        let (x, s) = single([0.0, 1.0]);
        assert_eq!(tae_loss(&x, &s, &unit_model(0.5)).unwrap(), 1.0);
    }

    #[test]
    fn loss_splits_by_pythagoras() {
        let (x, s) = single([1.0, 1.0]);
        assert_eq!(tae_loss(&x, &s, &unit_model(0.5)).unwrap(), 1.5);
    }

    #[test]
    fn loss_dimension_mismatch_names_axis() {
        let x = DataMatrix::new(array![[1.0, 0.0, 0.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0], 1).unwrap();
        assert!(matches!(
            tae_loss(&x, &s, &unit_model(0.5)),
            Err(TaeError::DimensionMismatch {
                axis: "features",
                ..
            })
        ));
        let x2 = DataMatrix::new(array![[1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert!(matches!(
            tae_loss(&x2, &s, &unit_model(0.5)),
            Err(TaeError::DimensionMismatch {
                axis: "samples",
                ..
            })
        ));
    }

    #[test]
    fn center_update_examples() {
        let x = DataMatrix::new(array![[0.0, 0.0], [2.0, 2.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0, 0], 1).unwrap();
        assert_eq!(center_update(&x, &s, 0).unwrap().to_vec(), vec![1.0, 1.0]);

        let x = DataMatrix::new(array![[0.0, 0.0], [4.0, 0.0]]).unwrap();
        let s = AssignmentMatrix::new(array![[0.25, 0.75], [0.75, 0.25]]).unwrap();
        assert_eq!(center_update(&x, &s, 0).unwrap().to_vec(), vec![3.0, 0.0]);

        let x = DataMatrix::new(array![[5.0, -1.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0], 1).unwrap();
        assert_eq!(center_update(&x, &s, 0).unwrap().to_vec(), vec![5.0, -1.0]);
    }

    #[test]
    fn center_update_empty_cluster() {
        let x = DataMatrix::new(array![[0.0, 0.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0], 2).unwrap();
        assert_eq!(
            center_update(&x, &s, 1),
            Err(TaeError::EmptyCluster { cluster: 1 })
        );
    }

    #[test]
    fn zero_learning_rate_only_moves_centers() {
        let x = DataMatrix::new(array![[1.0, 2.0], [3.0, 0.0], [-1.0, 1.0]]).unwrap();
        let s = AssignmentMatrix::from_labels(&[0, 0, 0], 1).unwrap();
        let model = unit_model(0.1);
        let next = gradient_step_weights(&x, &s, &model, 0.0).unwrap();
        assert_eq!(next.cluster(0).encoder, model.cluster(0).encoder);
        assert_eq!(next.cluster(0).decoder, model.cluster(0).decoder);
        assert_eq!(next.cluster(0).center.to_vec(), vec![1.0, 1.0]);
    }

    #[test]
    fn assign_exact_center_costs_nothing() {
        let model = TaeModel::new(
            vec![
                ClusterLinearAE::tied(array![[1.0, 0.0]], array![0.0, 0.0]),
                ClusterLinearAE::tied(array![[0.0, 1.0]], array![5.0, 5.0]),
            ],
            0.1,
            0,
            SUpdate::Lloyd,
        )
        .unwrap();
        let (j, costs) = assign_new_point(array![5.0, 5.0].view(), &model).unwrap();
        assert_eq!(j, 1);
        assert_eq!(costs[1], 0.0);
    }

    #[test]
    fn assign_tie_goes_low() {
        let model = TaeModel::new(
            vec![
                ClusterLinearAE::tied(array![[1.0, 0.0]], array![-1.0, 0.0]),
                ClusterLinearAE::tied(array![[1.0, 0.0]], array![1.0, 0.0]),
            ],
            0.1,
            0,
            SUpdate::Lloyd,
        )
        .unwrap();
        assert_eq!(
            assign_new_point(array![0.0, 3.0].view(), &model).unwrap().0,
            0
        );
    }

    #[test]
    fn reconstruct_fixed_point_and_null_space() {
        let model = TaeModel::new(
            vec![ClusterLinearAE::tied(array![[0.6, 0.8]], array![1.0, -1.0])],
            0.1,
            0,
            SUpdate::Lloyd,
        )
        .unwrap();
        let on_line = array![1.0 + 0.6 * 2.0, -1.0 + 0.8 * 2.0];
        let r = reconstruct(on_line.view(), &model, ReconstructionForm::Projection).unwrap();
        assert!((&r - &on_line).iter().all(|v| v.abs() < 1e-15));

        let off_line = array![1.0 - 0.8 * 3.0, -1.0 + 0.6 * 3.0];
        let r = reconstruct(off_line.view(), &model, ReconstructionForm::Projection).unwrap();
        assert!((&r - &array![1.0, -1.0]).iter().all(|v| v.abs() < 1e-15));

        let residual = reconstruct(off_line.view(), &model, ReconstructionForm::Residual).unwrap();
        assert!((&residual - &off_line).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn config_rejects_bad_values() {
        let bad_lr = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad_lr.validate().is_err());
        let bad_tol = TrainConfig {
            tol: -1.0,
            ..TrainConfig::default()
        };
        assert!(bad_tol.validate().is_err());
    }
}
