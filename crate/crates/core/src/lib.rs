//! Tensorized autoencoders: a bank of per-cluster autoencoders trained jointly
//! with a soft cluster assignment, so that every cluster gets its own
//! low-dimensional embedding.
//!
//! The crate contains the linear model ([`linear`]), a one-hidden-layer
//! nonlinear variant ([`mlp`]), comparison methods ([`baselines`]), spectral
//! checks of the closed-form optimum ([`spectral`]), data generation and
//! loading ([`datasets`]), evaluation measures ([`metrics`]) and the JSON
//! model format ([`model_io`]).

// Checks like `!(x > 0.0)` are written that way so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod baselines;
pub mod data;
pub mod datasets;
pub mod error;
pub mod linalg;
pub mod linear;
pub mod metrics;
pub mod mlp;
pub mod model_io;
pub mod rng;
pub mod spectral;

pub use data::{AssignmentMatrix, DataMatrix};
pub use error::{Result, TaeError};
pub use linear::{ClusterLinearAE, SUpdate, TaeModel, TrainConfig};
pub use mlp::{Activation, MLPAutoencoder, TensorizedMLP};
