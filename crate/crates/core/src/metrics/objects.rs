// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};

/// Tolerance on the sum of a composition's entries.
pub const COMPOSITION_SUM_TOLERANCE: f64 = 1e-9;
/// A gridded CDF's top-right node must reach at least `1 - CORNER_TOLERANCE`.
pub const CORNER_TOLERANCE: f64 = 1e-6;
/// Relative symmetry tolerance for [`SymMatrix`] input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Slack allowed on monotonicity and the `[0, 1]` range of CDF values.
const CDF_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Vector,
    Composition,
    GriddedCdf,
    SymMatrix,
}

impl ObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Vector => "vector",
            ObjectKind::Composition => "composition",
            ObjectKind::GriddedCdf => "gridded-cdf",
            ObjectKind::SymMatrix => "symmetric-matrix",
        }
    }
}

/// One observation in a metric space.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricObject {
    Vector(Vec<f64>),
    Composition(Composition),
    GriddedCdf(GriddedCdf),
    SymMatrix(SymMatrix),
}

impl MetricObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            MetricObject::Vector(_) => ObjectKind::Vector,
            MetricObject::Composition(_) => ObjectKind::Composition,
            MetricObject::GriddedCdf(_) => ObjectKind::GriddedCdf,
            MetricObject::SymMatrix(_) => ObjectKind::SymMatrix,
        }
    }
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    parts: Vec<f64>,
}

impl Composition {
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::validation("composition must have at least one part"));
        }
        if let Some((i, v)) = parts
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::validation(format!(
                "composition part {i} is {v}; parts must be finite and nonnegative"
            )));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > COMPOSITION_SUM_TOLERANCE {
            return Err(Error::validation(format!(
                "composition parts sum to {total}, expected 1"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Rectangular grid on which bivariate CDFs are sampled.
///
/// Nodes sit at cell centres: node `(i, j)` is at
/// `(x_min + (i + 1/2) hx, y_min + (j + 1/2) hy)` with `hx = (x_max - x_min) / nx`,
/// so the node sum times the cell area is a midpoint rule over the box.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(-4.0, 4.0, 50)
    }
}

impl GridSpec {
    pub fn square(min: f64, max: f64, resolution: usize) -> Self {
        Self {
            x_min: min,
            x_max: max,
            y_min: min,
            y_max: max,
            nx: resolution,
            ny: resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::Grid(format!("degenerate grid box {self:?}")));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Grid("grid resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64 * (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn x_node(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn y_node(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * (self.y_max - self.y_min) / self.ny as f64
    }
}

/// A bivariate CDF sampled on a [`GridSpec`]; `values[i * ny + j] = F(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedCdf {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GriddedCdf {
    /// Checks the value range and monotonicity along both axes. The corner
    /// mass is not enforced here; see [`GriddedCdf::corner_deficit`].
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.node_count() {
            return Err(Error::Grid(format!(
                "expected {}x{} = {} values, got {}",
                grid.nx,
                grid.ny,
                grid.node_count(),
                values.len()
            )));
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(-CDF_SLACK..=1.0 + CDF_SLACK).contains(&v) {
                return Err(Error::validation(format!(
                    "CDF value {v} at node ({}, {}) outside [0, 1]",
                    idx / grid.ny,
                    idx % grid.ny
                )));
            }
        }
        let ny = grid.ny;
        for i in 0..grid.nx {
            for j in 0..ny {
                let v = values[i * ny + j];
                if i + 1 < grid.nx && values[(i + 1) * ny + j] < v - CDF_SLACK {
                    return Err(Error::validation(format!(
                        "CDF decreases along x at node ({i}, {j})"
                    )));
                }
                if j + 1 < ny && values[i * ny + j + 1] < v - CDF_SLACK {
                    return Err(Error::validation(format!(
                        "CDF decreases along y at node ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { grid, values })
    }

    /// Builds `F(x, y)` on the grid from a closure.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.node_count());
        for i in 0..grid.nx {
            let x = grid.x_node(i);
            for j in 0..grid.ny {
                values.push(f(x, grid.y_node(j)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `1 - F(top-right node)`: mass the grid box fails to capture.
    pub fn corner_deficit(&self) -> f64 {
        1.0 - self.values[self.values.len() - 1]
    }

    /// Whether the box captures all but [`CORNER_TOLERANCE`] of the mass.
    pub fn corner_ok(&self) -> bool {
        self.corner_deficit() <= CORNER_TOLERANCE
    }
}

/// Real symmetric square matrix stored as its diagonal plus the strict upper
/// triangle in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl SymMatrix {
    /// From a dense row-major `dim x dim` array. Requires
    /// `|A_ij - A_ji| <= 1e-12 * max(1, |A_ij|)`; the upper triangle is kept.
    pub fn from_dense(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::dimension(format!(
                "expected {dim}x{dim} = {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("matrix entry {v} is not finite")));
        }
        let mut diag = Vec::with_capacity(dim);
        let mut upper = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
        for i in 0..dim {
            diag.push(data[i * dim + i]);
            for j in i + 1..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(1.0) {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                upper.push(a);
            }
        }
        Ok(Self { dim, diag, upper })
    }

    /// From the diagonal and the row-major strict upper triangle.
    pub fn from_parts(diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let dim = diag.len();
        if upper.len() != dim * dim.saturating_sub(1) / 2 {
            return Err(Error::dimension(format!(
                "strict upper triangle of a {dim}x{dim} matrix needs {} entries, got {}",
                dim * dim.saturating_sub(1) / 2,
                upper.len()
            )));
        }
        Ok(Self { dim, diag, upper })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn upper_index(&self, i: usize, j: usize) -> usize {
        // rows 0..i contribute (dim-1) + (dim-2) + ... + (dim-i) entries
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => self.diag[i],
            Ordering::Less => self.upper[self.upper_index(i, j)],
            Ordering::Greater => self.upper[self.upper_index(j, i)],
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }
}
