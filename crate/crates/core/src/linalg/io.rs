//! Matrix text format: a `rows cols` line followed by `rows` lines of
//! `cols` whitespace-separated decimal literals.

use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{LabError, Result};

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| LabError::Parse("empty matrix file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(LabError::Parse(format!("bad header `{header}`")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| LabError::Parse(format!("bad dimension `{s}`: {e}")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for line in lines {
        seen_rows += 1;
        if seen_rows > rows {
            return Err(LabError::Parse(format!("more than {rows} rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let x = tok
                .parse::<f64>()
                .map_err(|e| LabError::Parse(format!("bad entry `{tok}`: {e}")))?;
            data.push(x);
        }
        if data.len() - before != cols {
            return Err(LabError::Parse(format!(
                "row {seen_rows} has {} entries, expected {cols}",
                data.len() - before
            )));
        }
    }
    if seen_rows != rows {
        return Err(LabError::Parse(format!("expected {rows} rows, found {seen_rows}")));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, m.to_string())?;
    Ok(())
}
