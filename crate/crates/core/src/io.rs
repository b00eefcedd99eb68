//! Text formats.
//!
//! * Design matrices: headerless CSV, one row per line.
//! * Labels: one real per line.
//! * Weights: a JSON header line followed by one weight per line.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite double exactly. Blank lines are ignored on input; errors
//! carry the 1-based line number of the offending line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;
use crate::weights::{WeightKind, WeightVector};

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    let t = field.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Parse {
            line,
            message: format!("non-finite value {t:?}"),
        }),
        Err(_) => Err(Error::Parse {
            line,
            message: format!("cannot parse {t:?} as a real number"),
        }),
    }
}

pub fn parse_matrix_csv(text: &str) -> Result<DesignMatrix> {
    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let start = data.len();
        for field in line.split(',') {
            data.push(parse_real(field, k + 1)?);
        }
        let width = data.len() - start;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("expected {c} columns, found {width}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 0,
        message: "matrix file has no rows".into(),
    })?;
    DesignMatrix::new(rows, cols, data)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DesignMatrix> {
    parse_matrix_csv(&fs::read_to_string(path)?)
}

pub fn matrix_to_csv(x: &DesignMatrix) -> String {
    let mut out = String::new();
    for row in x.row_iter() {
        let fields: Vec<String> = row.iter().map(|&v| format_real(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: impl AsRef<Path>, x: &DesignMatrix) -> Result<()> {
    Ok(fs::write(path, matrix_to_csv(x))?)
}

pub fn parse_labels(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_real(l, k + 1))
        .collect()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_labels(&fs::read_to_string(path)?)
}

fn reals_to_lines(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for &v in values {
        out.push_str(&format_real(v));
        out.push('\n');
    }
    out
}

pub fn write_labels(path: impl AsRef<Path>, y: &[f64]) -> Result<()> {
    Ok(fs::write(path, reals_to_lines(y))?)
}

/// First line of a weights file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub kind: WeightKind,
    pub n: usize,
    pub d: usize,
    /// Sum of the weights; `d` for both Lewis weights and leverage scores.
    pub sum: f64,
    /// Lewis: max relative fixed-point defect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point_residual: Option<f64>,
    /// Leverage: `|sum - d|`, the trace of the hat matrix minus its rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

pub fn weights_to_string(header: &WeightsHeader, w: &WeightVector) -> Result<String> {
    if header.n != w.len() {
        return Err(Error::DimensionMismatch {
            expected: header.n,
            got: w.len(),
            context: "weights header",
        });
    }
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    out.push_str(&reals_to_lines(&w.values));
    Ok(out)
}

pub fn parse_weights(text: &str) -> Result<(WeightsHeader, WeightVector)> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let header: WeightsHeader = serde_json::from_str(first).map_err(|e| Error::Parse {
        line: 1,
        message: format!("bad weights header: {e}"),
    })?;
    let mut values = Vec::with_capacity(header.n);
    for (k, line) in rest.lines().enumerate() {
        if !line.trim().is_empty() {
            values.push(parse_real(line, k + 2)?);
        }
    }
    if values.len() != header.n {
        return Err(Error::Parse {
            line: 1,
            message: format!("header says {} weights, file has {}", header.n, values.len()),
        });
    }
    Ok((header.clone(), WeightVector::new(header.kind, values)))
}

pub fn write_weights(path: impl AsRef<Path>, header: &WeightsHeader, w: &WeightVector) -> Result<()> {
    Ok(fs::write(path, weights_to_string(header, w)?)?)
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<(WeightsHeader, WeightVector)> {
    parse_weights(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let x = DesignMatrix::new(2, 3, vec![0.1, -1.0 / 3.0, 1e-300, 2.5e17, 7.0, -0.0]).unwrap();
        let back = parse_matrix_csv(&matrix_to_csv(&x)).unwrap();
        for (a, b) in x.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_matrix_csv("1,2\n\n3,4\n5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn bad_field_names_line() {
        let err = parse_matrix_csv("1,2\n3,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_labels("1\n2\nNaN\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn weights_round_trip() {
        let w = WeightVector::new(WeightKind::Lewis, vec![0.123_456_789_012_345_68, 1.0, 2.0 / 3.0]);
        let h = WeightsHeader {
            kind: WeightKind::Lewis,
            n: 3,
            d: 2,
            sum: w.total(),
            fixed_point_residual: Some(1e-12),
            trace_defect: None,
            iterations: Some(7),
            tol: Some(1e-10),
        };
        let text = weights_to_string(&h, &w).unwrap();
        let (h2, w2) = parse_weights(&text).unwrap();
        assert_eq!(h, h2);
        assert_eq!(weights_to_string(&h2, &w2).unwrap(), text);
    }
}
