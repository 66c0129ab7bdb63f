//! Validated containers for the dataset and the soft assignment matrix.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TaeError};

/// Tolerance on the column sums of an [`AssignmentMatrix`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// An `n × d` matrix of samples, one sample per row, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Array2<f64>", into = "Array2<f64>")]
pub struct DataMatrix(Array2<f64>);

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(TaeError::InvalidInput(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos / values.ncols(), pos % values.ncols());
            return Err(TaeError::InvalidInput(format!(
                "non-finite entry at row {row}, column {col}"
            )));
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(TaeError::InvalidInput(format!(
                    "row {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| TaeError::InvalidInput(e.to_string()))?;
        Self::new(values)
    }

    pub fn n_samples(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn rows(&self) -> ndarray::iter::Lanes<'_, f64, ndarray::Ix1> {
        self.0.rows()
    }

    pub fn mean(&self) -> Array1<f64> {
        self.0
            .mean_axis(ndarray::Axis(0))
            .expect("data matrix is non-empty")
    }

    /// Rows selected by `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        Self::new(self.0.select(ndarray::Axis(0), indices))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

impl TryFrom<Array2<f64>> for DataMatrix {
    type Error = TaeError;

    fn try_from(values: Array2<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<DataMatrix> for Array2<f64> {
    fn from(data: DataMatrix) -> Self {
        data.0
    }
}

impl AsRef<Array2<f64>> for DataMatrix {
    fn as_ref(&self) -> &Array2<f64> {
        &self.0
    }
}

/// A `k × n` column-stochastic matrix: entry `(j, i)` is the weight of
/// sample `i` on cluster `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix(Array2<f64>);

impl AssignmentMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(TaeError::InvalidInput(
                "assignment matrix needs at least one cluster".into(),
            ));
        }
        for (i, col) in values.columns().into_iter().enumerate() {
            if col.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(TaeError::InvalidInput(format!(
                    "assignment column {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = col.sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(TaeError::InvalidInput(format!(
                    "assignment column {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self(values))
    }

    /// Hard assignment from labels; every label must be `< k`.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut values = Array2::zeros((k, labels.len()));
        for (i, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(TaeError::InvalidInput(format!(
                    "label {label} at position {i} is not below k = {k}"
                )));
            }
            values[[label, i]] = 1.0;
        }
        Ok(Self(values))
    }

    /// Every sample spread evenly across `k` clusters.
    pub fn uniform(k: usize, n: usize) -> Self {
        Self(Array2::from_elem((k, n), 1.0 / k as f64))
    }

    pub fn n_clusters(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn weight(&self, cluster: usize, sample: usize) -> f64 {
        self.0[[cluster, sample]]
    }

    /// Total weight carried by each cluster.
    pub fn cluster_mass(&self) -> Array1<f64> {
        self.0.sum_axis(ndarray::Axis(1))
    }

    /// Argmax per column, ties to the lowest cluster index.
    pub fn hard_labels(&self) -> Vec<usize> {
        self.0
            .columns()
            .into_iter()
            .map(|col| {
                let mut best = 0;
                for (j, &v) in col.iter().enumerate() {
                    if v > col[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    /// Reorders clusters so that new row `j` is old row `perm[j]`.
    pub fn permute_clusters(&self, perm: &[usize]) -> Self {
        Self(self.0.select(ndarray::Axis(0), perm))
    }

    pub(crate) fn set_column_one_hot(&mut self, sample: usize, cluster: usize) {
        self.0.column_mut(sample).fill(0.0);
        self.0[[cluster, sample]] = 1.0;
    }

    pub(crate) fn from_raw_unchecked(values: Array2<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}
