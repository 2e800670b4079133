//! CSV emission shared by the experiments and the CLI.
//!
//! Floats are printed with 17 significant digits so the files round-trip
//! double precision; lines end with `\n`. Rows containing non-finite
//! numbers are refused.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}
impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}
impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}
impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

/// 17-significant-digit decimal rendering of a double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a complete CSV document. Refuses non-finite floats and rows of
/// the wrong width.
pub fn to_string(columns: &[&str], rows: &[Vec<Value>]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(Error::InvalidParam(format!(
                "csv row {i} has {} fields, header has {}",
                row.len(),
                columns.len()
            )));
        }
        for (j, value) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            match value {
                Value::Float(x) => {
                    if !x.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "csv row {i}, column {}",
                            columns[j]
                        )));
                    }
                    out.push_str(&fmt_f64(*x));
                }
                Value::Int(v) => out.push_str(&v.to_string()),
                Value::Bool(b) => out.push_str(if *b { "1" } else { "0" }),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write(path: &Path, columns: &[&str], rows: &[Vec<Value>]) -> Result<()> {
    let body = to_string(columns, rows)?;
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_for_empty_rows() {
        let s = to_string(&["a", "b"], &[]).unwrap();
        assert_eq!(s, "a,b\n");
    }

    #[test]
    fn floats_round_trip() {
        let x = std::f64::consts::PI * 1e-7;
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn refuses_nan() {
        let err = to_string(&["a"], &[vec![Value::Float(f64::NAN)]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn bools_are_zero_one() {
        let s = to_string(
            &["flag", "count"],
            &[vec![Value::Bool(true), Value::Int(3)]],
        )
        .unwrap();
        assert_eq!(s, "flag,count\n1,3\n");
    }
}
