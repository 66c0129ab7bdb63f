//! A single tied linear autoencoder over the whole dataset, and the
//! embed-then-cluster pipeline built on it.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::baselines::kmeans::kmeans;
use crate::data::DataMatrix;
use crate::error::{check_dim, Result, TaeError};
use crate::linalg::{orthonormalize_rows, random_orthonormal_rows};
use crate::linear::{tied_gradient, TrainConfig};
use crate::rng::SeededRng;
use crate::spectral::scatter;

/// Encoder `U` (`h × d`), decoder `V` (`d × h`) and the global data mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAEModel {
    pub encoder: Array2<f64>,
    pub decoder: Array2<f64>,
    pub center: Array1<f64>,
    pub lambda: f64,
}

impl LinearAEModel {
    pub fn encode(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.encoder.dot(&(&x - &self.center))
    }

    /// `n × h` latent codes.
    pub fn embed(&self, x: &DataMatrix) -> Result<Array2<f64>> {
        check_dim("features", self.center.len(), x.n_features())?;
        let centered = &x.view() - &self.center.view().insert_axis(Axis(0));
        Ok(centered.dot(&self.encoder.t()))
    }

    /// `V U (x − mean) + mean` for every row.
    pub fn reconstruct(&self, x: &DataMatrix) -> Result<Array2<f64>> {
        let z = self.embed(x)?;
        Ok(z.dot(&self.decoder.t()) + self.center.view().insert_axis(Axis(0)))
    }

    /// `Σ_i ‖(x_i − m) − VU(x_i − m)‖² + λ‖U(x_i − m)‖²`.
    pub fn loss(&self, x: &DataMatrix) -> Result<f64> {
        let z = self.embed(x)?;
        let centered = &x.view() - &self.center.view().insert_axis(Axis(0));
        let residual = &centered - &z.dot(&self.decoder.t());
        Ok(residual.iter().map(|v| v * v).sum::<f64>()
            + self.lambda * z.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Trained single autoencoder plus its loss after each epoch.
#[derive(Debug, Clone)]
pub struct LinearAEOutcome {
    pub model: LinearAEModel,
    pub loss_trace: Vec<f64>,
    pub converged: bool,
}

/// Gradient descent on the tied, regularized reconstruction loss with
/// orthonormal encoder rows restored after every step. `config.latent_dim`
/// and `config.lambda` are ignored in favour of `h` and `lambda`.
pub fn train_linear_ae(
    x: &DataMatrix,
    h: usize,
    lambda: f64,
    config: &TrainConfig,
) -> Result<LinearAEOutcome> {
    let config = TrainConfig {
        latent_dim: h,
        lambda,
        ..*config
    };
    config.validate()?;
    let d = x.n_features();
    if h > d {
        return Err(TaeError::InvalidInput(format!(
            "latent dimension {h} exceeds input dimension {d}"
        )));
    }
    let center = x.mean();
    let sigma = scatter(x.view(), Array1::ones(x.n_samples()).view(), center.view());
    let mut rng = SeededRng::new(config.seed);
    let mut u = random_orthonormal_rows(h, d, &mut rng);
    let model_of = |u: &Array2<f64>| LinearAEModel {
        decoder: u.t().to_owned(),
        encoder: u.clone(),
        center: center.clone(),
        lambda,
    };
    let n = x.n_samples() as f64;
    let mut previous = model_of(&u).loss(x)?;
    let mut trace = vec![previous];
    let mut converged = false;
    for _ in 0..config.epochs {
        let grad = tied_gradient(&u, &sigma, lambda);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(TaeError::NumericalDivergence { cluster: 0 });
        }
        u = orthonormalize_rows((&u - &(grad * (config.learning_rate / n))).view())
            .map_err(|_| TaeError::NumericalDivergence { cluster: 0 })?;
        let loss = model_of(&u).loss(x)?;
        trace.push(loss);
        if config.converged(previous, loss) {
            converged = true;
            break;
        }
        previous = loss;
    }
    Ok(LinearAEOutcome {
        model: model_of(&u),
        loss_trace: trace,
        converged,
    })
}

/// Embeds with a trained single autoencoder, then clusters the codes with
/// k-means++ and Lloyd iterations.
pub fn ae_then_kmeans(x: &DataMatrix, k: usize, config: &TrainConfig) -> Result<Vec<usize>> {
    let ae = train_linear_ae(x, config.latent_dim, config.lambda, config)?;
    let codes = DataMatrix::new(ae.model.embed(x)?)?;
    Ok(kmeans(&codes, k, config.seed)?.labels)
}
