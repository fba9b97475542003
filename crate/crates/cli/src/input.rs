//! Parsing of matrices, vectors and scalars given on the command line.
//!
//! Matrices are accepted as JSON (`[[[re, im], ...], ...]` or a
//! `{"genus", "entries"}` record), as shorthand (`i`, `2i`, `0.5+1.5i`,
//! `diag(i, 2i)`), or as a path to a file holding JSON.

use std::path::Path;

use serde_json::Value;
use thetanull::nalgebra::DMatrix;
use thetanull::num_complex::Complex64;
use thetanull::siegel::{SiegelPoint, SiegelPointRecord};

use crate::CliError;

/// Parses a scalar such as `2`, `-i`, `1.5i`, `0.5+2i`, `1e-3-0.5i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || CliError::Parse(format!("cannot read {s:?} as a complex number"));
    if t.is_empty() {
        return Err(err());
    }
    if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| err())?,
        };
        let re = if re.is_empty() {
            0.0
        } else {
            re.parse::<f64>().map_err(|_| err())?
        };
        Ok(Complex64::new(re, im))
    } else {
        t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err())
    }
}

fn complex_from_json(v: &Value) -> Result<Complex64, CliError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(CliError::Parse(format!("expected [re, im] numbers, got {v}"))),
            }
        }
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::String(s) => parse_complex(s),
        _ => Err(CliError::Parse(format!(
            "expected a complex number as [re, im], got {v}"
        ))),
    }
}

fn parse_json(s: &str) -> Result<Value, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::Parse(format!("malformed JSON: {e}")))
}

/// Splits `a, b, c` at top-level commas.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn matrix_from_json(v: &Value) -> Result<DMatrix<Complex64>, CliError> {
    if let Value::Object(_) = v {
        let rec: SiegelPointRecord = serde_json::from_value(v.clone())
            .map_err(|e| CliError::Parse(format!("expected {{\"genus\", \"entries\"}}: {e}")))?;
        let n = rec.entries.len();
        if n != rec.genus {
            return Err(CliError::Parse(format!("genus {} but {n} rows", rec.genus)));
        }
        return matrix_from_rows(
            rec.entries
                .iter()
                .map(|row| row.iter().map(|c| Complex64::new(c[0], c[1])).collect())
                .collect(),
        );
    }
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::Parse("a matrix must be a JSON array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| CliError::Parse("every matrix row must be an array".into()))?
                .iter()
                .map(complex_from_json)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    matrix_from_rows(rows)
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> Result<DMatrix<Complex64>, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Parse("empty matrix".into()));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != n) {
        return Err(CliError::Parse(format!(
            "matrix is not square: row of length {} in {n} rows",
            row.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_from_shorthand(s: &str) -> Result<DMatrix<Complex64>, CliError> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix("diag(").and_then(|r| r.strip_suffix(')')) {
        let diag = split_args(inner)
            .into_iter()
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()?;
        let n = diag.len();
        return Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
    }
    Ok(DMatrix::from_element(1, 1, parse_complex(t)?))
}

/// Reads a period matrix; non-Siegel input is a domain error.
pub fn parse_siegel(s: &str) -> Result<SiegelPoint, CliError> {
    let m = parse_matrix(s)?;
    SiegelPoint::new(m).map_err(|e| CliError::Domain(e.to_string()))
}

pub fn parse_matrix(s: &str) -> Result<DMatrix<Complex64>, CliError> {
    let t = s.trim();
    if t.starts_with('[') || t.starts_with('{') {
        return matrix_from_json(&parse_json(t)?);
    }
    if !t.contains('(') && Path::new(t).is_file() {
        let text = std::fs::read_to_string(t).map_err(|e| CliError::Parse(format!("cannot read {t}: {e}")))?;
        return matrix_from_json(&parse_json(&text)?);
    }
    matrix_from_shorthand(t)
}

/// Reads a vector as JSON (`[[re, im], ...]`) or comma-separated scalars.
pub fn parse_vector(s: &str) -> Result<Vec<Complex64>, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        let v = parse_json(t)?;
        let items = v
            .as_array()
            .ok_or_else(|| CliError::Parse("a vector must be a JSON array".into()))?;
        return items.iter().map(complex_from_json).collect();
    }
    split_args(t).into_iter().map(parse_complex).collect()
}

/// Reads a scalar as shorthand or as JSON `[re, im]`.
pub fn parse_scalar(s: &str) -> Result<Complex64, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        return complex_from_json(&parse_json(t)?);
    }
    parse_complex(t)
}
