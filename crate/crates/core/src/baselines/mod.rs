//! Comparison methods: k-means, a single linear autoencoder, the
//! autoencoder-then-k-means pipeline, and EM for Gaussian mixtures with a
//! low-rank precision family.

pub mod gmm;
pub mod kmeans;
pub mod linear_ae;

pub use kmeans::{kmeans, kmeans_lloyd, kmeans_pp_init, KMeansState};
pub use linear_ae::{ae_then_kmeans, train_linear_ae, LinearAEModel};
