//! Dataset file loaders.
//!
//! CSV: comma-separated numeric cells, one sample per line, with an
//! optional header detected by a non-numeric first row. LIBSVM: sparse
//! `label idx:val ...` lines with 1-based, strictly increasing indices.
//! Labels may be -1/+1 or 0/1; 0 is remapped to -1.

use std::fs;
use std::path::Path;

use pinsvm_core::data::Dataset;

use crate::{CliError, Result};

fn remap_label(raw: f64) -> Option<f64> {
    if raw == 1.0 {
        Some(1.0)
    } else if raw == -1.0 || raw == 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// Loads a dense CSV file. `label_column` is the 0-based index of the
/// label column; every other column is a feature, in file order.
pub fn load_csv(path: &Path, label_column: usize) -> Result<Dataset> {
    let content = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut expected_fields: Option<usize> = None;

    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();

        // Header detection: a first row with any non-numeric cell.
        if rows.is_empty()
            && expected_fields.is_none()
            && cells.iter().any(|c| c.parse::<f64>().is_err())
        {
            expected_fields = Some(cells.len());
            continue;
        }
        if let Some(n) = expected_fields {
            if cells.len() != n {
                return Err(CliError::parse(
                    path,
                    line_no,
                    format!("expected {n} fields, got {}", cells.len()),
                ));
            }
        } else {
            expected_fields = Some(cells.len());
        }
        if label_column >= cells.len() {
            return Err(CliError::parse(
                path,
                line_no,
                format!(
                    "label column {label_column} out of range for {} fields",
                    cells.len()
                ),
            ));
        }

        let mut features = Vec::with_capacity(cells.len() - 1);
        let mut label = None;
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::parse(
                    path,
                    line_no,
                    format!("column {}: not a number: {cell:?}", col + 1),
                )
            })?;
            if col == label_column {
                label = Some(remap_label(value).ok_or_else(|| {
                    CliError::parse(
                        path,
                        line_no,
                        format!("column {}: label not \u{b1}1 or 0/1: {value}", col + 1),
                    )
                })?);
            } else {
                features.push(value);
            }
        }
        rows.push(features);
        labels.push(label.expect("label column checked above"));
    }

    if rows.is_empty() {
        return Err(CliError::parse(path, 0, "no samples"));
    }
    Dataset::from_rows(rows, labels).map_err(CliError::from)
}

/// Loads a sparse LIBSVM file into a dense dataset; absent indices are 0.
pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let content = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut dim = 0usize;

    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let raw: f64 = label_tok.parse().map_err(|_| {
            CliError::parse(path, line_no, format!("label not a number: {label_tok:?}"))
        })?;
        let label = remap_label(raw).ok_or_else(|| {
            CliError::parse(path, line_no, format!("label not \u{b1}1 or 0/1: {raw}"))
        })?;

        let mut pairs: Vec<(usize, f64)> = Vec::new();
        let mut last_index = 0usize;
        for tok in tokens {
            let (i_str, v_str) = tok.split_once(':').ok_or_else(|| {
                CliError::parse(
                    path,
                    line_no,
                    format!("malformed index:value pair: {tok:?}"),
                )
            })?;
            let index: usize = i_str.parse().map_err(|_| {
                CliError::parse(path, line_no, format!("bad feature index: {i_str:?}"))
            })?;
            if index == 0 {
                return Err(CliError::parse(
                    path,
                    line_no,
                    "feature indices are 1-based",
                ));
            }
            if index <= last_index {
                return Err(CliError::parse(
                    path,
                    line_no,
                    format!("non-increasing feature index {index} after {last_index}"),
                ));
            }
            let value: f64 = v_str.parse().map_err(|_| {
                CliError::parse(path, line_no, format!("bad feature value: {v_str:?}"))
            })?;
            last_index = index;
            pairs.push((index, value));
        }
        dim = dim.max(last_index);
        sparse_rows.push(pairs);
        labels.push(label);
    }

    if sparse_rows.is_empty() {
        return Err(CliError::parse(path, 0, "no samples"));
    }
    if dim == 0 {
        return Err(CliError::parse(path, 0, "no features on any line"));
    }
    let rows: Vec<Vec<f64>> = sparse_rows
        .into_iter()
        .map(|pairs| {
            let mut row = vec![0.0; dim];
            for (i, v) in pairs {
                row[i - 1] = v;
            }
            row
        })
        .collect();
    Dataset::from_rows(rows, labels).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_remaps_zero_one_labels() {
        let f = write_temp("0.5,1\n0.1,0\n0.9,1\n");
        let ds = load_csv(f.path(), 1).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
        assert_eq!(ds.row(1), &[0.1]);
    }

    #[test]
    fn csv_detects_header() {
        let f = write_temp("x,y,label\n1,2,1\n3,4,0\n");
        let ds = load_csv(f.path(), 2).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn csv_empty_file_is_an_error() {
        let f = write_temp("");
        let err = load_csv(f.path(), 0).unwrap_err();
        assert!(err.to_string().contains("no samples"));
    }

    #[test]
    fn csv_reports_row_and_column_of_bad_cells() {
        let f = write_temp("1,1\nfoo,0\n");
        let err = load_csv(f.path(), 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "row missing in {msg}");
        assert!(msg.contains("column 1"), "column missing in {msg}");
    }

    #[test]
    fn csv_rejects_out_of_range_labels() {
        let f = write_temp("1,2\n");
        let err = load_csv(f.path(), 1).unwrap_err();
        assert!(err.to_string().contains("label not"));
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let f = write_temp("1,2,1\n3,0\n");
        let err = load_csv(f.path(), 0).unwrap_err();
        assert!(err.to_string().contains("expected 3 fields"));
    }

    #[test]
    fn libsvm_fills_absent_indices_with_zero() {
        let f = write_temp("+1 1:0.5 3:-1\n-1 2:2\n");
        let ds = load_libsvm(f.path()).unwrap();
        assert_eq!(ds.row(0), &[0.5, 0.0, -1.0]);
        assert_eq!(ds.row(1), &[0.0, 2.0, 0.0]);
        assert_eq!(ds.labels(), &[1.0, -1.0]);
    }

    #[test]
    fn libsvm_featureless_line_is_all_zero() {
        let f = write_temp("+1 1:0.5 3:-1\n-1\n");
        let ds = load_libsvm(f.path()).unwrap();
        assert_eq!(ds.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(ds.labels()[1], -1.0);
    }

    #[test]
    fn libsvm_rejects_bad_labels_and_pairs() {
        let f = write_temp("2 1:1\n");
        assert!(load_libsvm(f.path())
            .unwrap_err()
            .to_string()
            .contains("label not"));
        let f = write_temp("1 1:1 1:2\n");
        assert!(load_libsvm(f.path())
            .unwrap_err()
            .to_string()
            .contains("non-increasing"));
        let f = write_temp("1 broken\n");
        assert!(load_libsvm(f.path())
            .unwrap_err()
            .to_string()
            .contains("malformed"));
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), 0).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }
}
