//! The JSON state file: `{"dims": [...], "matrix": [[[re, im], ...], ...]}`.
//!
//! Row and column indices are little-endian in the subsystems: subsystem 0 is
//! the fastest-varying digit. In memory the first subsystem is the most
//! significant factor, so reading and writing permute the indices.

use std::fmt::Write as _;
use std::path::Path;

use entlab_core::qmat::{ComplexMatrix, C64};
use entlab_core::states::DensityMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::CliError;

#[derive(Debug, Error)]
pub enum StateFileError {
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),

    #[error("field `{field}`: {detail}")]
    Shape { field: &'static str, detail: String },

    #[error("field `matrix`: {0}")]
    Invalid(entlab_core::Error),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn shape(field: &'static str, detail: String) -> StateFileError {
    StateFileError::Shape { field, detail }
}

/// Position in the in-memory (big-endian) order of file index `f`.
fn internal_index(mut f: usize, dims: &[usize]) -> usize {
    let mut digits = vec![0; dims.len()];
    for (digit, &d) in digits.iter_mut().zip(dims) {
        *digit = f % d;
        f /= d;
    }
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

pub fn parse_state(text: &str) -> Result<DensityMatrix, StateFileError> {
    let raw: RawState = serde_json::from_str(text)?;
    if raw.dims.is_empty() || raw.dims.contains(&0) {
        return Err(shape("dims", format!("{:?} must be a non-empty list of positive integers", raw.dims)));
    }
    let n = raw
        .dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= entlab_core::qmat::DEFAULT_DIM_CAP)
        .ok_or_else(|| shape("dims", format!("{:?} exceeds the dimension cap", raw.dims)))?;
    if raw.matrix.len() != n {
        return Err(shape("matrix", format!("expected {n} rows for dims {:?}, found {}", raw.dims, raw.matrix.len())));
    }
    let perm: Vec<usize> = (0..n).map(|f| internal_index(f, &raw.dims)).collect();
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for (r, row) in raw.matrix.iter().enumerate() {
        if row.len() != n {
            return Err(shape("matrix", format!("row {r}: expected {n} entries, found {}", row.len())));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            data[perm[r] * n + perm[c]] = C64::new(re, im);
        }
    }
    let m = ComplexMatrix::from_vec(n, n, data).map_err(StateFileError::Invalid)?;
    DensityMatrix::new(m, &raw.dims).map_err(StateFileError::Invalid)
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_state(&text).map_err(|source| CliError::StateFile {
        path: path.to_owned(),
        source,
    })
}

/// Serializes with 17 significant digits, enough to round-trip every entry.
pub fn write_state(rho: &DensityMatrix) -> String {
    let dims = rho.dims();
    let n = rho.dim();
    let perm: Vec<usize> = (0..n).map(|f| internal_index(f, dims)).collect();
    let m = rho.matrix();
    let mut out = String::from("{\n  \"dims\": [");
    let dims_text: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    out.push_str(&dims_text.join(", "));
    out.push_str("],\n  \"matrix\": [\n");
    for r in 0..n {
        out.push_str("    [");
        for c in 0..n {
            let z = m.row(perm[r])[perm[c]];
            if c > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "[{:.16e}, {:.16e}]", z.re, z.im);
        }
        out.push(']');
        if r + 1 < n {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}
