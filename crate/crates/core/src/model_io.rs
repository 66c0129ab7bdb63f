//! JSON model documents.
//!
//! ```json
//! {"version": 1, "k": 2, "d": 2, "h": 1, "lambda": 0.1, "seed": 7,
//!  "clusters": [{"U": [[0.6, 0.8]], "V": [[0.6], [0.8]], "C": [1.0, 2.0]}]}
//! ```
//!
//! Matrices are arrays of rows. Nonlinear models add an `"arch"` block and
//! store `W1, b1, …, W4, b4` per cluster in place of `U` and `V`. A model
//! trained on standardized features carries the standardization in
//! `"input_transform"` so that raw data can be fed back in.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::datasets::ZScore;
use crate::error::{Result, TaeError};
use crate::linear::{ClusterLinearAE, SUpdate, TaeModel};
use crate::mlp::{Activation, MLPAutoencoder, TensorizedMLP};

pub const FORMAT_VERSION: u32 = 1;

/// Either kind of trained model.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Linear(TaeModel),
    Mlp(TensorizedMLP),
}

impl SavedModel {
    pub fn k(&self) -> usize {
        match self {
            Self::Linear(m) => m.k(),
            Self::Mlp(m) => m.k(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Linear(m) => m.input_dim(),
            Self::Mlp(m) => m.input_dim(),
        }
    }
}

/// A model plus the feature standardization it expects, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub model: SavedModel,
    pub seed: u64,
    pub input_transform: Option<ZScore>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArchBlock {
    #[serde(rename = "type")]
    kind: String,
    activation: Activation,
    hidden: usize,
    /// `[rows, cols]` of W1 through W4.
    layers: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TransformBlock {
    Zscore { mean: Vec<f64>, std: Vec<f64> },
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ClusterRecord {
    #[serde(rename = "C")]
    center: Vec<f64>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none", default)]
    u: Option<Vec<Vec<f64>>>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none", default)]
    v: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W1", skip_serializing_if = "Option::is_none", default)]
    w1: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b1: Option<Vec<f64>>,
    #[serde(rename = "W2", skip_serializing_if = "Option::is_none", default)]
    w2: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b2: Option<Vec<f64>>,
    #[serde(rename = "W3", skip_serializing_if = "Option::is_none", default)]
    w3: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b3: Option<Vec<f64>>,
    #[serde(rename = "W4", skip_serializing_if = "Option::is_none", default)]
    w4: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b4: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    k: usize,
    d: usize,
    h: usize,
    lambda: f64,
    seed: u64,
    #[serde(default)]
    s_update: SUpdate,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    arch: Option<ArchBlock>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    input_transform: Option<TransformBlock>,
    clusters: Vec<ClusterRecord>,
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(name: &str, cluster: usize, value: Option<Vec<Vec<f64>>>) -> Result<Array2<f64>> {
    let value =
        value.ok_or_else(|| TaeError::Parse(format!("cluster {cluster} is missing {name}")))?;
    let n_rows = value.len();
    let n_cols = value.first().map_or(0, Vec::len);
    if value.iter().any(|r| r.len() != n_cols) {
        return Err(TaeError::Parse(format!(
            "cluster {cluster}: {name} has ragged rows"
        )));
    }
    Array2::from_shape_vec((n_rows, n_cols), value.into_iter().flatten().collect())
        .map_err(|e| TaeError::Parse(format!("cluster {cluster}: {name}: {e}")))
}

fn vector(name: &str, cluster: usize, value: Option<Vec<f64>>) -> Result<Array1<f64>> {
    value
        .map(Array1::from)
        .ok_or_else(|| TaeError::Parse(format!("cluster {cluster} is missing {name}")))
}

fn to_document(bundle: &ModelBundle) -> ModelDocument {
    let input_transform = bundle
        .input_transform
        .as_ref()
        .map(|z| TransformBlock::Zscore {
            mean: z.mean.clone(),
            std: z.std.clone(),
        });
    match &bundle.model {
        SavedModel::Linear(m) => ModelDocument {
            version: FORMAT_VERSION,
            k: m.k(),
            d: m.input_dim(),
            h: m.latent_dim(),
            lambda: m.lambda(),
            seed: bundle.seed,
            s_update: m.s_update(),
            arch: None,
            input_transform,
            clusters: m
                .clusters()
                .iter()
                .map(|c| ClusterRecord {
                    center: c.center.to_vec(),
                    u: Some(rows(&c.encoder)),
                    v: Some(rows(&c.decoder)),
                    ..Default::default()
                })
                .collect(),
        },
        SavedModel::Mlp(m) => ModelDocument {
            version: FORMAT_VERSION,
            k: m.k(),
            d: m.input_dim(),
            h: m.latent_dim(),
            lambda: m.lambda(),
            seed: bundle.seed,
            s_update: SUpdate::default(),
            arch: Some(ArchBlock {
                kind: "mlp".into(),
                activation: m.activation(),
                hidden: m.hidden_dim(),
                layers: {
                    let ae = &m.clusters()[0];
                    [&ae.w1, &ae.w2, &ae.w3, &ae.w4]
                        .map(|w| [w.nrows(), w.ncols()])
                        .to_vec()
                },
            }),
            input_transform,
            clusters: m
                .clusters()
                .iter()
                .zip(m.centers())
                .map(|(ae, c)| ClusterRecord {
                    center: c.to_vec(),
                    w1: Some(rows(&ae.w1)),
                    b1: Some(ae.b1.to_vec()),
                    w2: Some(rows(&ae.w2)),
                    b2: Some(ae.b2.to_vec()),
                    w3: Some(rows(&ae.w3)),
                    b3: Some(ae.b3.to_vec()),
                    w4: Some(rows(&ae.w4)),
                    b4: Some(ae.b4.to_vec()),
                    ..Default::default()
                })
                .collect(),
        },
    }
}

fn from_document(doc: ModelDocument) -> Result<ModelBundle> {
    if doc.version != FORMAT_VERSION {
        return Err(TaeError::Parse(format!(
            "unsupported model version {} (expected {FORMAT_VERSION})",
            doc.version
        )));
    }
    if doc.clusters.len() != doc.k {
        return Err(TaeError::Parse(format!(
            "header says k = {} but {} clusters are stored",
            doc.k,
            doc.clusters.len()
        )));
    }
    let model = match doc.arch {
        None => {
            let clusters = doc
                .clusters
                .into_iter()
                .enumerate()
                .map(|(j, c)| {
                    Ok(ClusterLinearAE {
                        encoder: matrix("U", j, c.u)?,
                        decoder: matrix("V", j, c.v)?,
                        center: Array1::from(c.center),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            SavedModel::Linear(TaeModel::new(clusters, doc.lambda, doc.seed, doc.s_update)?)
        }
        Some(arch) => {
            if arch.kind != "mlp" {
                return Err(TaeError::Parse(format!(
                    "unknown architecture {:?}",
                    arch.kind
                )));
            }
            let mut centers = Vec::with_capacity(doc.k);
            let mut nets = Vec::with_capacity(doc.k);
            for (j, c) in doc.clusters.into_iter().enumerate() {
                centers.push(Array1::from(c.center));
                nets.push(MLPAutoencoder {
                    w1: matrix("W1", j, c.w1)?,
                    b1: vector("b1", j, c.b1)?,
                    w2: matrix("W2", j, c.w2)?,
                    b2: vector("b2", j, c.b2)?,
                    w3: matrix("W3", j, c.w3)?,
                    b3: vector("b3", j, c.b3)?,
                    w4: matrix("W4", j, c.w4)?,
                    b4: vector("b4", j, c.b4)?,
                    activation: arch.activation,
                });
            }
            SavedModel::Mlp(TensorizedMLP::new(nets, centers, doc.lambda)?)
        }
    };
    if model.input_dim() != doc.d {
        return Err(TaeError::Parse(format!(
            "header says d = {} but the clusters have dimension {}",
            doc.d,
            model.input_dim()
        )));
    }
    let input_transform = doc
        .input_transform
        .map(|TransformBlock::Zscore { mean, std }| ZScore { mean, std });
    if let Some(z) = &input_transform {
        if z.mean.len() != doc.d || z.std.len() != doc.d {
            return Err(TaeError::Parse(
                "input_transform length does not match d".into(),
            ));
        }
    }
    Ok(ModelBundle {
        model,
        seed: doc.seed,
        input_transform,
    })
}

pub fn model_to_json(bundle: &ModelBundle) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_document(bundle))?)
}

pub fn model_from_json(text: &str) -> Result<ModelBundle> {
    from_document(serde_json::from_str(text)?)
}

pub fn save_model(path: impl AsRef<Path>, bundle: &ModelBundle) -> Result<()> {
    std::fs::write(path, model_to_json(bundle)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    model_from_json(&std::fs::read_to_string(path)?)
}
