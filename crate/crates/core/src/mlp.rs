//! Tensorized one-hidden-layer autoencoders.
//!
//! Every cluster owns an encoder `g(y) = W2 φ(W1 y + b1) + b2` and a decoder
//! `f(z) = W4 φ(W3 z + b3) + b4`, applied to `y = x − C_j`. The cost of a
//! sample under cluster `j` is `‖y − f(g(y))‖² + λ‖g(y)‖²`, and training
//! alternates plain gradient steps on all weights with the same center and
//! assignment updates as the linear model.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::assignment::{argmin, lloyd_from_costs, projected_step_from_costs, weighted_cost};
use crate::baselines::kmeans::{kmeans_lloyd, kmeans_pp_init_with, DEFAULT_MAX_ITER};
use crate::data::{AssignmentMatrix, DataMatrix};
use crate::error::{check_dim, Result, TaeError};
use crate::linalg::weighted_mean;
use crate::linear::{SUpdate, TaeModel, TrainConfig};
use crate::rng::SeededRng;

/// Elementwise nonlinearity of the hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    /// No nonlinearity; the network collapses to a linear map.
    Identity,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Self::Relu => v.max(0.0),
            Self::Tanh => v.tanh(),
            Self::Identity => v,
        }
    }

    /// Derivative at `v`; the ReLU kink at 0 gets slope 0.
    pub fn derivative(self, v: f64) -> f64 {
        match self {
            Self::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => 1.0 - v.tanh().powi(2),
            Self::Identity => 1.0,
        }
    }
}

/// One autoencoder: `W1` (`m × d`), `W2` (`h × m`), `W3` (`m × h`), `W4` (`d × m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MLPAutoencoder {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
    pub w4: Array2<f64>,
    pub b4: Array1<f64>,
    pub activation: Activation,
}

/// Gradient of a loss with respect to every parameter of one autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
    pub w4: Array2<f64>,
    pub b4: Array1<f64>,
}

impl MlpGradient {
    fn zeros_like(ae: &MLPAutoencoder) -> Self {
        Self {
            w1: Array2::zeros(ae.w1.raw_dim()),
            b1: Array1::zeros(ae.b1.raw_dim()),
            w2: Array2::zeros(ae.w2.raw_dim()),
            b2: Array1::zeros(ae.b2.raw_dim()),
            w3: Array2::zeros(ae.w3.raw_dim()),
            b3: Array1::zeros(ae.b3.raw_dim()),
            w4: Array2::zeros(ae.w4.raw_dim()),
            b4: Array1::zeros(ae.b4.raw_dim()),
        }
    }

    /// All entries in the order of [`MLPAutoencoder::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.w3)
            .chain(&self.b3)
            .chain(&self.w4)
            .chain(&self.b4)
            .copied()
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }
}

fn gaussian_matrix(rows: usize, cols: usize, scale: f64, rng: &mut SeededRng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || scale * rng.normal())
}

impl MLPAutoencoder {
    /// Gaussian weights with variance `1 / fan_in`, zero biases.
    pub fn random(
        d: usize,
        h: usize,
        m: usize,
        activation: Activation,
        rng: &mut SeededRng,
    ) -> Self {
        let fan = |n: usize| 1.0 / (n as f64).sqrt();
        Self {
            w1: gaussian_matrix(m, d, fan(d), rng),
            b1: Array1::zeros(m),
            w2: gaussian_matrix(h, m, fan(m), rng),
            b2: Array1::zeros(h),
            w3: gaussian_matrix(m, h, fan(h), rng),
            b3: Array1::zeros(m),
            w4: gaussian_matrix(d, m, fan(m), rng),
            b4: Array1::zeros(d),
            activation,
        }
    }

    pub fn zeros(d: usize, h: usize, m: usize, activation: Activation) -> Self {
        Self {
            w1: Array2::zeros((m, d)),
            b1: Array1::zeros(m),
            w2: Array2::zeros((h, m)),
            b2: Array1::zeros(h),
            w3: Array2::zeros((m, h)),
            b3: Array1::zeros(m),
            w4: Array2::zeros((d, m)),
            b4: Array1::zeros(d),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn latent_dim(&self) -> usize {
        self.w2.nrows()
    }

    /// Checks that all layer shapes chain together and every entry is finite.
    pub fn validate(&self) -> Result<()> {
        let (m, d, h) = (self.hidden_dim(), self.input_dim(), self.latent_dim());
        let shapes = [
            ("b1", self.b1.len(), m),
            ("w2 columns", self.w2.ncols(), m),
            ("b2", self.b2.len(), h),
            ("w3 rows", self.w3.nrows(), m),
            ("w3 columns", self.w3.ncols(), h),
            ("b3", self.b3.len(), m),
            ("w4 rows", self.w4.nrows(), d),
            ("w4 columns", self.w4.ncols(), m),
            ("b4", self.b4.len(), d),
        ];
        for (axis, found, expected) in shapes {
            check_dim(axis, expected, found)?;
        }
        if m == 0 || d == 0 || h == 0 {
            return Err(TaeError::InvalidInput(
                "layer widths must be positive".into(),
            ));
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(TaeError::InvalidInput(
                "network has non-finite parameters".into(),
            ));
        }
        Ok(())
    }

    /// Number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.to_flat().len()
    }

    /// `w1, b1, w2, b2, w3, b3, w4, b4`, each in row-major order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.w3)
            .chain(&self.b3)
            .chain(&self.w4)
            .chain(&self.b4)
            .copied()
            .collect()
    }

    /// Inverse of [`Self::to_flat`].
    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        check_dim("parameters", self.n_params(), values.len())?;
        let mut it = values.iter().copied();
        for v in self
            .w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
            .chain(self.w3.iter_mut())
            .chain(self.b3.iter_mut())
            .chain(self.w4.iter_mut())
            .chain(self.b4.iter_mut())
        {
            *v = it.next().unwrap_or_default();
        }
        Ok(())
    }

    fn step(&mut self, grad: &MlpGradient, scale: f64) {
        self.w1.scaled_add(-scale, &grad.w1);
        self.b1.scaled_add(-scale, &grad.b1);
        self.w2.scaled_add(-scale, &grad.w2);
        self.b2.scaled_add(-scale, &grad.b2);
        self.w3.scaled_add(-scale, &grad.w3);
        self.b3.scaled_add(-scale, &grad.b3);
        self.w4.scaled_add(-scale, &grad.w4);
        self.b4.scaled_add(-scale, &grad.b4);
    }

    fn forward_batch(&self, y: ArrayView2<'_, f64>) -> BatchForward {
        let act = self.activation;
        let a1 = y.dot(&self.w1.t()) + &self.b1;
        let h1 = a1.mapv(|v| act.apply(v));
        let z = h1.dot(&self.w2.t()) + &self.b2;
        let a3 = z.dot(&self.w3.t()) + &self.b3;
        let h3 = a3.mapv(|v| act.apply(v));
        let r = h3.dot(&self.w4.t()) + &self.b4;
        BatchForward {
            a1,
            h1,
            z,
            a3,
            h3,
            r,
        }
    }
}

/// Row-per-sample activations of every layer.
struct BatchForward {
    a1: Array2<f64>,
    h1: Array2<f64>,
    z: Array2<f64>,
    a3: Array2<f64>,
    h3: Array2<f64>,
    r: Array2<f64>,
}

/// Latent code and reconstruction of one input.
pub fn mlp_forward(
    x: ArrayView1<'_, f64>,
    ae: &MLPAutoencoder,
) -> Result<(Array1<f64>, Array1<f64>)> {
    check_dim("features", ae.input_dim(), x.len())?;
    let out = ae.forward_batch(x.insert_axis(Axis(0)));
    Ok((out.z.row(0).to_owned(), out.r.row(0).to_owned()))
}

/// Width and nonlinearity of the per-cluster networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MlpArch {
    /// Hidden width; `None` means twice the input dimension.
    pub hidden: Option<usize>,
    pub activation: Activation,
}

impl MlpArch {
    pub fn hidden_for(&self, d: usize) -> usize {
        self.hidden.unwrap_or(2 * d)
    }
}

/// `k` autoencoders, their centers and the regularization weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorizedMLP {
    clusters: Vec<MLPAutoencoder>,
    centers: Vec<Array1<f64>>,
    lambda: f64,
}

impl TensorizedMLP {
    pub fn new(
        clusters: Vec<MLPAutoencoder>,
        centers: Vec<Array1<f64>>,
        lambda: f64,
    ) -> Result<Self> {
        let first = clusters
            .first()
            .ok_or_else(|| TaeError::InvalidInput("model needs at least one cluster".into()))?;
        check_dim("centers", clusters.len(), centers.len())?;
        let (d, h) = (first.input_dim(), first.latent_dim());
        for (ae, c) in clusters.iter().zip(&centers) {
            ae.validate()?;
            check_dim("features", d, ae.input_dim())?;
            check_dim("latent", h, ae.latent_dim())?;
            check_dim("features", d, c.len())?;
        }
        if !lambda.is_finite() {
            return Err(TaeError::InvalidInput(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self {
            clusters,
            centers,
            lambda,
        })
    }

    /// The identity-activation network that computes exactly what the linear
    /// model computes: `W1 = I`, `W2 = U`, `W3 = V`, `W4 = I`, zero biases.
    pub fn from_linear(model: &TaeModel) -> Self {
        let d = model.input_dim();
        let h = model.latent_dim();
        let clusters = model
            .clusters()
            .iter()
            .map(|c| MLPAutoencoder {
                w1: Array2::eye(d),
                b1: Array1::zeros(d),
                w2: c.encoder.clone(),
                b2: Array1::zeros(h),
                w3: c.decoder.clone(),
                b3: Array1::zeros(d),
                w4: Array2::eye(d),
                b4: Array1::zeros(d),
                activation: Activation::Identity,
            })
            .collect();
        Self {
            clusters,
            centers: model.clusters().iter().map(|c| c.center.clone()).collect(),
            lambda: model.lambda(),
        }
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

    pub fn hidden_dim(&self) -> usize {
        self.clusters[0].hidden_dim()
    }

    pub fn activation(&self) -> Activation {
        self.clusters[0].activation
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn clusters(&self) -> &[MLPAutoencoder] {
        &self.clusters
    }

    pub fn clusters_mut(&mut self) -> &mut [MLPAutoencoder] {
        &mut self.clusters
    }

    pub fn centers(&self) -> &[Array1<f64>] {
        &self.centers
    }

    fn centered(&self, x: &DataMatrix, j: usize) -> Array2<f64> {
        &x.view() - &self.centers[j].view().insert_axis(Axis(0))
    }

    /// `k × n` matrix of per-sample, per-cluster costs.
    pub fn cost_matrix(&self, x: &DataMatrix) -> Result<Array2<f64>> {
        check_dim("features", self.input_dim(), x.n_features())?;
        let mut costs = Array2::zeros((self.k(), x.n_samples()));
        for (j, ae) in self.clusters.iter().enumerate() {
            let y = self.centered(x, j);
            let out = ae.forward_batch(y.view());
            let residual = &y - &out.r;
            let rec = residual.map_axis(Axis(1), |r| r.dot(&r));
            let reg = out.z.map_axis(Axis(1), |z| z.dot(&z));
            costs.row_mut(j).assign(&(rec + reg * self.lambda));
        }
        Ok(costs)
    }

    /// Cheapest cluster for a new sample and its cost under every cluster.
    pub fn assign(&self, x: ArrayView1<'_, f64>) -> Result<(usize, Array1<f64>)> {
        check_dim("features", self.input_dim(), x.len())?;
        let data = DataMatrix::new(x.insert_axis(Axis(0)).to_owned())?;
        let costs = self.cost_matrix(&data)?.column(0).to_owned();
        Ok((argmin(costs.view()), costs))
    }

    /// `f(g(x − C)) + C` through the assigned cluster.
    pub fn reconstruct(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let (j, _) = self.assign(x)?;
        let y = &x - &self.centers[j];
        let (_, r) = mlp_forward(y.view(), &self.clusters[j])?;
        Ok(r + &self.centers[j])
    }

    pub fn reconstruct_all(&self, x: &DataMatrix) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((x.n_samples(), x.n_features()));
        for (i, row) in x.rows().into_iter().enumerate() {
            out.row_mut(i).assign(&self.reconstruct(row)?);
        }
        Ok(out)
    }
}

fn check_assignment(x: &DataMatrix, s: &AssignmentMatrix, model: &TensorizedMLP) -> Result<()> {
    check_dim("samples", x.n_samples(), s.n_samples())?;
    check_dim("clusters", model.k(), s.n_clusters())?;
    check_dim("features", model.input_dim(), x.n_features())
}

/// Assignment-weighted sum of per-sample costs, using the model's centers.
pub fn tensorized_mlp_loss(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TensorizedMLP,
) -> Result<f64> {
    check_assignment(x, s, model)?;
    Ok(weighted_cost(s, model.cost_matrix(x)?.view()))
}

/// Gradients of [`tensorized_mlp_loss`] with respect to every weight and
/// bias of every cluster, centers held fixed.
pub fn mlp_backward(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TensorizedMLP,
) -> Result<Vec<MlpGradient>> {
    check_assignment(x, s, model)?;
    let mut grads = Vec::with_capacity(model.k());
    for (j, ae) in model.clusters.iter().enumerate() {
        let weights = s.view().row(j).to_owned();
        if weights.iter().all(|&w| w == 0.0) {
            grads.push(MlpGradient::zeros_like(ae));
            continue;
        }
        let w = weights.insert_axis(Axis(1));
        let y = model.centered(x, j);
        let f = ae.forward_batch(y.view());
        let act = ae.activation;

        let dr = (&f.r - &y) * &w * 2.0;
        let dh3 = dr.dot(&ae.w4);
        let da3 = dh3 * f.a3.mapv(|v| act.derivative(v));
        let dz = da3.dot(&ae.w3) + &f.z * &w * (2.0 * model.lambda);
        let dh1 = dz.dot(&ae.w2);
        let da1 = dh1 * f.a1.mapv(|v| act.derivative(v));

        let grad = MlpGradient {
            w1: da1.t().dot(&y),
            b1: da1.sum_axis(Axis(0)),
            w2: dz.t().dot(&f.h1),
            b2: dz.sum_axis(Axis(0)),
            w3: da3.t().dot(&f.z),
            b3: da3.sum_axis(Axis(0)),
            w4: dr.t().dot(&f.h3),
            b4: dr.sum_axis(Axis(0)),
        };
        if !grad.is_finite() {
            return Err(TaeError::NumericalDivergence { cluster: j });
        }
        grads.push(grad);
    }
    Ok(grads)
}

/// One full-batch gradient step on every network (with `lr` scaling the
/// per-sample mean loss, as in the linear model), then every center moves to
/// its weighted mean.
pub fn mlp_gradient_step(
    x: &DataMatrix,
    s: &AssignmentMatrix,
    model: &TensorizedMLP,
    lr: f64,
) -> Result<TensorizedMLP> {
    if !(lr >= 0.0) || !lr.is_finite() {
        return Err(TaeError::InvalidInput(format!(
            "learning rate must be >= 0, got {lr}"
        )));
    }
    let grads = mlp_backward(x, s, model)?;
    let scale = lr / x.n_samples() as f64;
    let mut next = model.clone();
    for (j, grad) in grads.iter().enumerate() {
        next.clusters[j].step(grad, scale);
        if next.clusters[j].to_flat().iter().any(|v| !v.is_finite()) {
            return Err(TaeError::NumericalDivergence { cluster: j });
        }
        next.centers[j] = weighted_mean(x.view(), s.view().row(j))
            .ok_or(TaeError::EmptyCluster { cluster: j })?;
    }
    Ok(next)
}

/// Per-epoch state handed to a training observer.
#[derive(Debug)]
pub struct MlpEpochSnapshot<'a> {
    pub epoch: usize,
    pub model: &'a TensorizedMLP,
    pub assignments: &'a AssignmentMatrix,
    pub loss: f64,
}

/// Result of [`train_mlp`].
#[derive(Debug, Clone)]
pub struct MlpTrainOutcome {
    pub model: TensorizedMLP,
    pub assignments: AssignmentMatrix,
    /// Loss at initialization followed by the loss after every epoch.
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
    pub converged: bool,
}

/// k-means++ and Lloyd iterations for assignments and centers, random
/// networks for the weights.
pub fn initialize_mlp(
    x: &DataMatrix,
    k: usize,
    config: &TrainConfig,
    arch: MlpArch,
) -> Result<(TensorizedMLP, AssignmentMatrix)> {
    config.validate()?;
    let (n, d) = (x.n_samples(), x.n_features());
    if k == 0 || k > n {
        return Err(TaeError::InvalidInput(format!(
            "k = {k} must be between 1 and n = {n}"
        )));
    }
    let m = arch.hidden_for(d);
    if m == 0 {
        return Err(TaeError::InvalidInput("hidden width must be >= 1".into()));
    }
    let mut rng = SeededRng::new(config.seed);
    let seeds = kmeans_pp_init_with(x, k, &mut rng)?;
    let state = kmeans_lloyd(x, seeds, DEFAULT_MAX_ITER)?;
    let clusters = (0..k)
        .map(|_| MLPAutoencoder::random(d, config.latent_dim, m, arch.activation, &mut rng))
        .collect();
    let centers = state
        .centers
        .rows()
        .into_iter()
        .map(|c| c.to_owned())
        .collect();
    let model = TensorizedMLP::new(clusters, centers, config.lambda)?;
    Ok((model, AssignmentMatrix::from_labels(&state.labels, k)?))
}

/// Trains `k` networks of the given architecture from a k-means start.
pub fn train_mlp(
    x: &DataMatrix,
    k: usize,
    config: &TrainConfig,
    arch: MlpArch,
) -> Result<MlpTrainOutcome> {
    let (model, s) = initialize_mlp(x, k, config, arch)?;
    train_mlp_from(x, s, model, config, &mut |_| {})
}

/// Alternates weight steps and assignment updates from the given start.
pub fn train_mlp_from(
    x: &DataMatrix,
    s: AssignmentMatrix,
    model: TensorizedMLP,
    config: &TrainConfig,
    observer: &mut dyn FnMut(&MlpEpochSnapshot<'_>),
) -> Result<MlpTrainOutcome> {
    config.validate()?;
    config.warn_on_lambda_range();
    check_assignment(x, &s, &model)?;
    let mut rng = SeededRng::new(config.seed ^ 0x5eed_0fe3_7a11_0001);
    let mut model = TensorizedMLP {
        lambda: config.lambda,
        ..model
    };
    let mut s = s;
    repair_empty_clusters(x, &mut s, &mut model, &mut rng)?;
    let mut previous = tensorized_mlp_loss(x, &s, &model)?;
    let mut trace = vec![previous];
    let mut converged = false;
    let mut epochs_run = 0;
    for epoch in 0..config.epochs {
        model = mlp_gradient_step(x, &s, &model, config.learning_rate)?;
        let costs = model.cost_matrix(x)?;
        s = match config.s_update {
            SUpdate::Lloyd => lloyd_from_costs(costs.view()),
            SUpdate::ProjectedGradient => {
                projected_step_from_costs(&s, costs.view(), config.learning_rate)?
            }
        };
        repair_empty_clusters(x, &mut s, &mut model, &mut rng)?;
        let loss = tensorized_mlp_loss(x, &s, &model)?;
        if !loss.is_finite() {
            return Err(TaeError::NumericalDivergence { cluster: 0 });
        }
        trace.push(loss);
        epochs_run = epoch + 1;
        observer(&MlpEpochSnapshot {
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
        for j in 0..model.k() {
            if let Some(c) = weighted_mean(x.view(), s.view().row(j)) {
                model.centers[j] = c;
            }
        }
    }
    let final_loss = tensorized_mlp_loss(x, &s, &model)?;
    Ok(MlpTrainOutcome {
        model,
        assignments: s,
        loss_trace: trace,
        final_loss,
        epochs_run,
        converged,
    })
}

/// Same policy as the linear model: an empty cluster restarts at the
/// costliest unused sample with a fresh random network.
fn repair_empty_clusters(
    x: &DataMatrix,
    s: &mut AssignmentMatrix,
    model: &mut TensorizedMLP,
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
        let old = &model.clusters[empty];
        model.clusters[empty] = MLPAutoencoder::random(
            old.input_dim(),
            old.latent_dim(),
            old.hidden_dim(),
            old.activation,
            rng,
        );
        model.centers[empty] = x.row(donor).to_owned();
        s.set_column_one_hot(donor, empty);
    }
    match s.cluster_mass().iter().position(|&m| m <= 0.0) {
        Some(cluster) => Err(TaeError::EmptyCluster { cluster }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_network_outputs_zero() {
        let ae = MLPAutoencoder::zeros(3, 2, 4, Activation::Tanh);
        let (z, r) = mlp_forward(array![1.0, -2.0, 0.5].view(), &ae).unwrap();
        assert!(z.iter().chain(r.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn identity_relu_network_passes_nonnegative_input() {
        let eye = Array2::eye(3);
        let ae = MLPAutoencoder {
            w1: eye.clone(),
            b1: Array1::zeros(3),
            w2: eye.clone(),
            b2: Array1::zeros(3),
            w3: eye.clone(),
            b3: Array1::zeros(3),
            w4: eye,
            b4: Array1::zeros(3),
            activation: Activation::Relu,
        };
        let x = array![0.0, 1.5, 2.0];
        assert_eq!(mlp_forward(x.view(), &ae).unwrap().1, x);
    }

    #[test]
    fn zero_network_loss_is_total_scatter() {
        let x = DataMatrix::new(array![[1.0, 2.0], [3.0, 0.0], [2.0, 4.0]]).unwrap();
        let model = TensorizedMLP::new(
            vec![MLPAutoencoder::zeros(2, 1, 4, Activation::Tanh)],
            vec![x.mean()],
            0.1,
        )
        .unwrap();
        let s = AssignmentMatrix::from_labels(&[0, 0, 0], 1).unwrap();
        // Mean (2, 2): squared distances 1 + 0, 1 + 4, 0 + 4.
        assert!((tensorized_mlp_loss(&x, &s, &model).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unused_cluster_gradient_is_zero() {
        let mut rng = SeededRng::new(1);
        let x = DataMatrix::new(array![[1.0, 2.0], [3.0, 0.0]]).unwrap();
        let model = TensorizedMLP::new(
            vec![
                MLPAutoencoder::random(2, 1, 3, Activation::Tanh, &mut rng),
                MLPAutoencoder::random(2, 1, 3, Activation::Tanh, &mut rng),
            ],
            vec![array![0.0, 0.0], array![1.0, 1.0]],
            0.1,
        )
        .unwrap();
        let s = AssignmentMatrix::from_labels(&[0, 0], 2).unwrap();
        let g = mlp_backward(&x, &s, &model).unwrap();
        assert!(g[1].to_flat().iter().all(|&v| v == 0.0));
        assert!(g[0].to_flat().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = SeededRng::new(2);
        let ae = MLPAutoencoder::random(3, 2, 5, Activation::Relu, &mut rng);
        let mut other = MLPAutoencoder::zeros(3, 2, 5, Activation::Relu);
        other.set_flat(&ae.to_flat()).unwrap();
        assert_eq!(ae, other);
        assert_eq!(ae.n_params(), 5 * 3 + 5 + 2 * 5 + 2 + 5 * 2 + 5 + 3 * 5 + 3);
    }

    #[test]
    fn relu_kink_has_zero_slope() {
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
        assert_eq!(Activation::Relu.derivative(1e-300), 1.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut ae = MLPAutoencoder::zeros(3, 2, 4, Activation::Tanh);
        ae.b3 = Array1::zeros(5);
        assert!(ae.validate().is_err());
    }
}
