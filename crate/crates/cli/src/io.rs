//! File helpers shared by the subcommands.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tae_core::datasets::{csv_headers, read_csv_table, CsvTable};

use crate::args::ColumnOptions;

/// Reads the selected columns; the label column is used only if the file
/// has one. A zero-byte file reads as an empty table.
pub fn read_table(path: &Path, columns: &ColumnOptions) -> Result<CsvTable> {
    let headers = csv_headers(path).with_context(|| format!("reading {}", path.display()))?;
    let label = headers
        .contains(&columns.label_col)
        .then_some(columns.label_col.as_str());
    let table = read_csv_table(path, &columns.features, label)
        .with_context(|| format!("reading {}", path.display()))?;
    if table.dropped_rows > 0 {
        log::warn!(
            "{}: dropped {} rows with missing values",
            path.display(),
            table.dropped_rows
        );
    }
    Ok(table)
}

pub fn labels_csv(labels: &[usize]) -> String {
    let mut out = String::from("cluster\n");
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    std::fs::write(path, labels_csv(labels)).with_context(|| format!("writing {}", path.display()))
}

/// Reads a `cluster` column of non-negative integers.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let table = read_csv_table(path, &["cluster".to_owned()], None)
        .with_context(|| format!("reading {}", path.display()))?;
    if table.dropped_rows > 0 {
        bail!(
            "{}: {} rows have no cluster id",
            path.display(),
            table.dropped_rows
        );
    }
    table
        .values
        .column(0)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                bail!(
                    "{}: row {} has cluster id {v}, expected a non-negative integer",
                    path.display(),
                    i + 2
                )
            }
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
