//! Planted anisotropic mixtures, CSV ingestion, standardization and noise.

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Result, TaeError};
use crate::rng::SeededRng;

/// Shape of one planted cluster. The major axis lies in the plane of the first
/// two coordinates at `angle_deg` from the first axis; every other direction
/// has spread `std_minor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterShape {
    pub mean: Vec<f64>,
    pub angle_deg: f64,
    pub std_major: f64,
    pub std_minor: f64,
}

/// Planted Gaussian mixture with known labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub k: usize,
    pub n_per_cluster: usize,
    pub d: usize,
    pub clusters: Vec<ClusterShape>,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_per_cluster == 0 || self.d == 0 {
            return Err(TaeError::InvalidInput(
                "k, n_per_cluster and d must all be positive".into(),
            ));
        }
        if self.clusters.len() != self.k {
            return Err(TaeError::InvalidInput(format!(
                "spec lists {} clusters but k = {}",
                self.clusters.len(),
                self.k
            )));
        }
        for (j, c) in self.clusters.iter().enumerate() {
            if c.mean.len() != self.d {
                return Err(TaeError::InvalidInput(format!(
                    "cluster {j} mean has length {}, expected d = {}",
                    c.mean.len(),
                    self.d
                )));
            }
            if !(c.std_major > 0.0 && c.std_minor > 0.0) {
                return Err(TaeError::InvalidInput(format!(
                    "cluster {j} standard deviations must be positive"
                )));
            }
            if !c.angle_deg.is_finite() || c.mean.iter().any(|m| !m.is_finite()) {
                return Err(TaeError::InvalidInput(format!(
                    "cluster {j} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }

    /// Unit major axis of cluster `j`.
    pub fn major_axis(&self, j: usize) -> Array1<f64> {
        let mut axis = Array1::zeros(self.d);
        let theta = self.clusters[j].angle_deg.to_radians();
        if self.d == 1 {
            axis[0] = 1.0;
        } else {
            axis[0] = theta.cos();
            axis[1] = theta.sin();
        }
        axis
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Two long, thin, nearly vertical clusters leaning toward each other so
    /// their upper tails cross. The centers are 4 apart while each cluster is
    /// about 12 long, so Euclidean distance splits them along the wrong axis.
    pub fn crossing(seed: u64) -> Self {
        Self {
            k: 2,
            n_per_cluster: 150,
            d: 2,
            clusters: vec![
                ClusterShape {
                    mean: vec![-2.0, 0.0],
                    angle_deg: 75.0,
                    std_major: 3.0,
                    std_minor: 0.05,
                },
                ClusterShape {
                    mean: vec![2.0, 0.0],
                    angle_deg: -75.0,
                    std_major: 3.0,
                    std_minor: 0.05,
                },
            ],
            seed,
        }
    }

    /// Two perpendicular elongated clusters sharing one center, so every
    /// cluster mean sits inside the other cluster.
    pub fn nested(seed: u64) -> Self {
        let bar = |angle_deg: f64| ClusterShape {
            mean: vec![0.0, 0.0],
            angle_deg,
            std_major: 3.0,
            std_minor: 0.1,
        };
        Self {
            k: 2,
            n_per_cluster: 150,
            d: 2,
            clusters: vec![bar(0.0), bar(90.0)],
            seed,
        }
    }

    /// Three elongated clusters with different orientations, well apart.
    pub fn three_oriented(seed: u64) -> Self {
        Self {
            k: 3,
            n_per_cluster: 200,
            d: 2,
            clusters: vec![
                ClusterShape {
                    mean: vec![0.0, 0.0],
                    angle_deg: 0.0,
                    std_major: 1.5,
                    std_minor: 0.2,
                },
                ClusterShape {
                    mean: vec![10.0, 0.0],
                    angle_deg: 60.0,
                    std_major: 1.5,
                    std_minor: 0.2,
                },
                ClusterShape {
                    mean: vec![5.0, 9.0],
                    angle_deg: 120.0,
                    std_major: 1.5,
                    std_minor: 0.2,
                },
            ],
            seed,
        }
    }
}

/// A data matrix with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub x: DataMatrix,
    /// Ground truth in `0..k`, when known.
    pub labels: Option<Vec<usize>>,
    pub feature_names: Vec<String>,
}

fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

/// Samples every cluster of `spec` in order, `n_per_cluster` points each.
pub fn generate_planted(spec: &PlantedSpec) -> Result<LabeledData> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let n = spec.k * spec.n_per_cluster;
    let mut values = Array2::zeros((n, spec.d));
    let mut labels = Vec::with_capacity(n);
    for (j, shape) in spec.clusters.iter().enumerate() {
        let major = spec.major_axis(j);
        // Orthonormal frame whose first vector is the major axis.
        let mut frame = Array2::<f64>::eye(spec.d);
        if spec.d >= 2 {
            frame.row_mut(0).assign(&major);
            frame[[1, 0]] = -major[1];
            frame[[1, 1]] = major[0];
        }
        for _ in 0..spec.n_per_cluster {
            let row = labels.len();
            for axis in 0..spec.d {
                let std = if axis == 0 {
                    shape.std_major
                } else {
                    shape.std_minor
                };
                let z = std * rng.normal();
                for c in 0..spec.d {
                    values[[row, c]] += z * frame[[axis, c]];
                }
            }
            for c in 0..spec.d {
                values[[row, c]] += shape.mean[c];
            }
            labels.push(j);
        }
    }
    Ok(LabeledData {
        x: DataMatrix::new(values)?,
        labels: Some(labels),
        feature_names: default_feature_names(spec.d),
    })
}

/// Rows parsed from a CSV file; may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub values: Array2<f64>,
    pub labels: Option<Vec<usize>>,
    /// Distinct label strings in order of first appearance.
    pub label_names: Vec<String>,
    pub feature_names: Vec<String>,
    /// Rows skipped because a selected cell was empty or `NA`.
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

/// Reads a comma-separated file with a header row.
///
/// `feature_cols` names the numeric columns to keep; when empty, every
/// column except `label_col` is used. Rows with a missing value in any
/// selected column are dropped and counted. Label strings map to ids in
/// order of first appearance.
pub fn read_csv_table(
    path: impl AsRef<Path>,
    feature_cols: &[String],
    label_col: Option<&str>,
) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TaeError::MissingColumn(name.to_owned()))
    };
    let feature_names: Vec<String> = if feature_cols.is_empty() {
        headers
            .iter()
            .filter(|h| Some(h.as_str()) != label_col && !(h.is_empty() && headers.len() == 1))
            .cloned()
            .collect()
    } else {
        feature_cols.to_vec()
    };
    let feature_idx = feature_names
        .iter()
        .map(|name| position(name))
        .collect::<Result<Vec<_>>>()?;
    let label_idx = label_col.map(position).transpose()?;

    let mut flat = Vec::new();
    let mut rows = 0;
    let mut dropped = 0;
    let mut label_ids = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut label_lookup: HashMap<String, usize> = HashMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        // Header is line 1.
        let row_number = line + 2;
        let cell = |i: usize| record.get(i).unwrap_or("");
        if feature_idx
            .iter()
            .chain(label_idx.iter())
            .any(|&i| is_missing(cell(i)))
        {
            dropped += 1;
            continue;
        }
        for (&i, name) in feature_idx.iter().zip(&feature_names) {
            let raw = cell(i);
            let value: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| TaeError::NonNumeric {
                    row: row_number,
                    column: name.clone(),
                    value: raw.to_owned(),
                })?;
            flat.push(value);
        }
        if let Some(li) = label_idx {
            let raw = cell(li).to_owned();
            let next = label_lookup.len();
            let id = *label_lookup.entry(raw.clone()).or_insert_with(|| {
                label_names.push(raw);
                next
            });
            label_ids.push(id);
        }
        rows += 1;
    }
    let values = Array2::from_shape_vec((rows, feature_names.len()), flat)
        .map_err(|e| TaeError::Parse(e.to_string()))?;
    Ok(CsvTable {
        values,
        labels: label_idx.map(|_| label_ids),
        label_names,
        feature_names,
        dropped_rows: dropped,
    })
}

/// Column names from the header row.
pub fn csv_headers(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    Ok(reader.headers()?.iter().map(str::to_owned).collect())
}

/// [`read_csv_table`] for files that must contain at least one usable row.
pub fn load_csv(
    path: impl AsRef<Path>,
    feature_cols: &[String],
    label_col: Option<&str>,
) -> Result<(LabeledData, usize)> {
    let table = read_csv_table(path, feature_cols, label_col)?;
    if table.dropped_rows > 0 {
        log::info!("dropped {} rows with missing values", table.dropped_rows);
    }
    let data = LabeledData {
        x: DataMatrix::new(table.values)?,
        labels: table.labels,
        feature_names: table.feature_names,
    };
    Ok((data, table.dropped_rows))
}

/// Writes samples with an optional trailing `label` column.
pub fn write_csv(path: impl AsRef<Path>, data: &LabeledData) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = data.feature_names.clone();
    if data.labels.is_some() {
        header.push("label".to_owned());
    }
    writer.write_record(&header)?;
    for (i, row) in data.x.rows().into_iter().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(labels) = &data.labels {
            record.push(labels[i].to_string());
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-column mean and standard deviation of a standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ZScore {
    pub fn apply(&self, x: &DataMatrix) -> Result<DataMatrix> {
        crate::error::check_dim("features", self.mean.len(), x.n_features())?;
        let mut v = x.as_ref().clone();
        for (c, mut col) in v.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|a| (a - self.mean[c]) / self.std[c]);
        }
        DataMatrix::new(v)
    }

    pub fn invert(&self, x: &DataMatrix) -> Result<DataMatrix> {
        crate::error::check_dim("features", self.mean.len(), x.n_features())?;
        let mut v = x.as_ref().clone();
        for (c, mut col) in v.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|a| a * self.std[c] + self.mean[c]);
        }
        DataMatrix::new(v)
    }
}

/// Standardizes every column to mean 0 and (population) standard deviation 1.
pub fn zscore_normalize(x: &DataMatrix) -> Result<(DataMatrix, ZScore)> {
    let n = x.n_samples() as f64;
    let mut mean = Vec::with_capacity(x.n_features());
    let mut std = Vec::with_capacity(x.n_features());
    for (c, col) in x.view().columns().into_iter().enumerate() {
        let m = col.sum() / n;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        if !(var.sqrt() > 1e-12 * m.abs().max(1.0)) {
            return Err(TaeError::ZeroVariance(format!("x{c}")));
        }
        mean.push(m);
        std.push(var.sqrt());
    }
    let params = ZScore { mean, std };
    Ok((params.apply(x)?, params))
}

/// `X + ε` with independent `N(0, σ²)` entries.
pub fn corrupt_gaussian(x: &DataMatrix, sigma: f64, seed: u64) -> Result<DataMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(TaeError::InvalidInput(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = SeededRng::new(seed);
    let noisy = x.as_ref().mapv(|v| v + sigma * rng.normal());
    DataMatrix::new(noisy)
}

/// Seeded shuffle of `0..n` split into a training part holding
/// `round(train_fraction · n)` indices and a test part holding the rest.
pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut idx);
    let cut = ((n as f64) * train_fraction).round() as usize;
    let test = idx.split_off(cut.min(n));
    (idx, test)
}

/// Train/test material for a denoising comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseSplit {
    /// What the models are trained on: the clean training rows, or their
    /// corrupted copy.
    pub train_input: DataMatrix,
    pub test_clean: DataMatrix,
    pub test_noisy: DataMatrix,
}

/// Seed offset for the noise so that it does not share the split's stream.
const NOISE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seeded shuffle split, then Gaussian corruption of the test rows (and of
/// the training rows when `corrupt_train` is set).
pub fn denoise_split(
    x: &DataMatrix,
    train_fraction: f64,
    sigma: f64,
    corrupt_train: bool,
    seed: u64,
) -> Result<DenoiseSplit> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(TaeError::InvalidInput(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let (train_idx, test_idx) = train_test_split(x.n_samples(), train_fraction, seed);
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(TaeError::InvalidInput(
            "the split leaves an empty train or test part".into(),
        ));
    }
    let train_clean = x.select_rows(&train_idx)?;
    let test_clean = x.select_rows(&test_idx)?;
    let test_noisy = corrupt_gaussian(&test_clean, sigma, seed ^ NOISE_STREAM)?;
    let train_input = if corrupt_train {
        corrupt_gaussian(&train_clean, sigma, seed.wrapping_add(1) ^ NOISE_STREAM)?
    } else {
        train_clean
    };
    Ok(DenoiseSplit {
        train_input,
        test_clean,
        test_noisy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn names(cols: &[&str]) -> Vec<String> {
        cols.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn degenerate_spread_sits_on_means() {
        let mut spec = PlantedSpec::three_oriented(4);
        for c in &mut spec.clusters {
            c.std_major = 1e-9;
            c.std_minor = 1e-9;
        }
        let data = generate_planted(&spec).unwrap();
        let labels = data.labels.unwrap();
        for (row, &l) in data.x.rows().into_iter().zip(&labels) {
            for (a, b) in row.iter().zip(&spec.clusters[l].mean) {
                assert!((a - b).abs() < 1e-7);
            }
        }
        assert_eq!(
            labels.iter().filter(|&&l| l == 2).count(),
            spec.n_per_cluster
        );
    }

    #[test]
    fn same_seed_same_bits() {
        let a = generate_planted(&PlantedSpec::crossing(9)).unwrap();
        let b = generate_planted(&PlantedSpec::crossing(9)).unwrap();
        let bits = |d: &LabeledData| d.x.view().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn spec_validation() {
        let mut spec = PlantedSpec::crossing(0);
        spec.clusters[0].std_minor = 0.0;
        assert!(generate_planted(&spec).is_err());
        let mut spec = PlantedSpec::crossing(0);
        spec.k = 3;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn csv_basic() {
        let f = csv_file("a,b\n1,2\n3,4\n");
        let (data, dropped) = load_csv(f.path(), &names(&["a", "b"]), None).unwrap();
        assert_eq!(data.x.view(), ndarray::array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn csv_drops_missing() {
        let f = csv_file("a,b,c\n1,,3\n4,5,6\n");
        let (data, dropped) = load_csv(f.path(), &names(&["a", "b", "c"]), None).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(data.x.n_samples(), 1);
    }

    #[test]
    fn csv_label_first_appearance() {
        let f = csv_file("v,species\n1,x\n2,y\n3,x\n");
        let (data, _) = load_csv(f.path(), &names(&["v"]), Some("species")).unwrap();
        assert_eq!(data.labels.unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn csv_default_features_skip_label() {
        let f = csv_file("a,b,label\n1,2,0\n3,4,1\n");
        let (data, _) = load_csv(f.path(), &[], Some("label")).unwrap();
        assert_eq!(data.feature_names, names(&["a", "b"]));
    }

    #[test]
    fn csv_errors_name_location() {
        let f = csv_file("a,b\n1,2\n3,oops\n");
        assert_eq!(
            load_csv(f.path(), &names(&["a", "b"]), None).unwrap_err(),
            TaeError::NonNumeric {
                row: 3,
                column: "b".into(),
                value: "oops".into()
            }
        );
        assert_eq!(
            load_csv(f.path(), &names(&["a", "z"]), None).unwrap_err(),
            TaeError::MissingColumn("z".into())
        );
    }

    #[test]
    fn zscore_examples() {
        let x = DataMatrix::new(ndarray::array![[0.0], [2.0]]).unwrap();
        let (z, params) = zscore_normalize(&x).unwrap();
        assert_eq!(z.view(), ndarray::array![[-1.0], [1.0]]);
        let (again, _) = zscore_normalize(&z).unwrap();
        assert!((&again.view() - &z.view()).iter().all(|v| v.abs() < 1e-12));
        let back = params.invert(&z).unwrap();
        assert!((&back.view() - &x.view()).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zscore_zero_variance() {
        let x = DataMatrix::new(ndarray::array![[1.0, 3.0], [2.0, 3.0]]).unwrap();
        assert_eq!(
            zscore_normalize(&x).unwrap_err(),
            TaeError::ZeroVariance("x1".into())
        );
    }

    #[test]
    fn noise_zero_and_repeatable() {
        let x = generate_planted(&PlantedSpec::crossing(1)).unwrap().x;
        assert_eq!(corrupt_gaussian(&x, 0.0, 5).unwrap(), x);
        assert_eq!(
            corrupt_gaussian(&x, 0.3, 5).unwrap(),
            corrupt_gaussian(&x, 0.3, 5).unwrap()
        );
        assert_ne!(
            corrupt_gaussian(&x, 0.3, 5).unwrap(),
            corrupt_gaussian(&x, 0.3, 6).unwrap()
        );
    }

    #[test]
    fn split_sizes() {
        let (train, test) = train_test_split(10, 0.8, 2);
        assert_eq!((train.len(), test.len()), (8, 2));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}
