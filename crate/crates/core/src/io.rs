// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited text input and output.
//!
//! Fields are separated by commas, semicolons or whitespace. Lines starting
//! with `#` are comments. Blank lines separate blocks, which is how sequences
//! of matrices and gridded CDFs are stored in a single file; a directory of
//! files, read in name order, works as well.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{Composition, DistanceMatrix, GridSpec, GriddedCdf, Metric, MetricObject, SymMatrix};

/// A parsed row and its one-based line number.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub line: usize,
    pub values: Vec<f64>,
}

/// Rows grouped into blank-line separated blocks.
pub fn parse_blocks(text: &str, path: &Path) -> Result<Vec<Vec<Row>>> {
    let mut blocks = Vec::new();
    let mut current: Vec<Row> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let values = line
            .split(|ch: char| ch == ',' || ch == ';' || ch.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("cannot parse '{f}' as a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        current.push(Row {
            line: idx + 1,
            values,
        });
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

/// All rows of a file, ignoring block structure.
pub fn parse_rows(text: &str, path: &Path) -> Result<Vec<Row>> {
    Ok(parse_blocks(text, path)?.into_iter().flatten().collect())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn check_width(rows: &[Row], width: usize, path: &Path) -> Result<()> {
    match rows.iter().find(|r| r.values.len() != width) {
        Some(r) => Err(parse_error(
            path,
            r.line,
            format!("expected {width} fields, found {}", r.values.len()),
        )),
        None => Ok(()),
    }
}

/// Blocks of a file, or the single blocks of each file in a directory.
fn read_block_source(path: &Path) -> Result<Vec<(PathBuf, Vec<Row>)>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(path, err)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut out = Vec::with_capacity(files.len());
        for f in files {
            let rows = parse_rows(&read_text(&f)?, &f)?;
            if !rows.is_empty() {
                out.push((f, rows));
            }
        }
        Ok(out)
    } else {
        let blocks = parse_blocks(&read_text(path)?, path)?;
        Ok(blocks.into_iter().map(|b| (path.to_path_buf(), b)).collect())
    }
}

/// Reads a sequence of objects for `metric`: one vector or composition per
/// row, or one matrix or gridded CDF per block.
pub fn read_objects(path: &Path, metric: Metric, grid_box: Option<[f64; 4]>) -> Result<Vec<MetricObject>> {
    let objects = match metric {
        Metric::Euclidean | Metric::Composition => {
            let rows = parse_rows(&read_text(path)?, path)?;
            let Some(first) = rows.first() else {
                return Err(Error::input(format!("{}: no data rows", path.display())));
            };
            check_width(&rows, first.values.len(), path)?;
            rows.into_iter()
                .map(|r| match metric {
                    Metric::Composition => Composition::new(r.values)
                        .map(MetricObject::Composition)
                        .map_err(|e| parse_error(path, r.line, e.to_string())),
                    _ => Ok(MetricObject::Vector(r.values)),
                })
                .collect::<Result<Vec<_>>>()?
        }
        Metric::Frobenius => read_block_source(path)?
            .into_iter()
            .map(|(file, rows)| {
                let dim = rows.len();
                check_width(&rows, dim, &file)?;
                let dense: Vec<f64> = rows.iter().flat_map(|r| r.values.iter().copied()).collect();
                SymMatrix::from_dense(dim, &dense)
                    .map(MetricObject::SymMatrix)
                    .map_err(|e| parse_error(&file, rows[0].line, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?,
        Metric::CdfL1 => {
            let [x_min, x_max, y_min, y_max] = grid_box.unwrap_or([-4.0, 4.0, -4.0, 4.0]);
            read_block_source(path)?
                .into_iter()
                .map(|(file, rows)| {
                    let ny = rows[0].values.len();
                    check_width(&rows, ny, &file)?;
                    let grid = GridSpec {
                        x_min,
                        x_max,
                        y_min,
                        y_max,
                        nx: rows.len(),
                        ny,
                    };
                    let values = rows.iter().flat_map(|r| r.values.iter().copied()).collect();
                    GriddedCdf::new(grid, values)
                        .map(MetricObject::GriddedCdf)
                        .map_err(|e| parse_error(&file, rows[0].line, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    if objects.is_empty() {
        return Err(Error::input(format!("{}: no objects found", path.display())));
    }
    Ok(objects)
}

/// Whether parsed rows form a square, exactly symmetric matrix with a zero
/// diagonal.
pub fn looks_like_distance_matrix(rows: &[Row]) -> bool {
    let n = rows.len();
    n > 0
        && rows.iter().all(|r| r.values.len() == n)
        && (0..n).all(|i| rows[i].values[i] == 0.0 && (0..i).all(|j| rows[i].values[j] == rows[j].values[i]))
}

pub fn read_distance_matrix(path: &Path) -> Result<DistanceMatrix> {
    let rows = parse_rows(&read_text(path)?, path)?;
    let n = rows.len();
    check_width(&rows, n, path)?;
    let values: Vec<Vec<f64>> = rows.into_iter().map(|r| r.values).collect();
    DistanceMatrix::from_rows(&values, "file")
}

/// Comma-separated rows with shortest round-trip formatting.
pub fn format_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn format_matrix(d: &DistanceMatrix) -> String {
    format_rows(d.rows())
}
