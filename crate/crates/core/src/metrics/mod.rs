// SPDX-License-Identifier: MIT OR Apache-2.0

//! Object types, the built-in metrics, and distance matrices.
//!
//! Every statistic downstream of this module consumes only a
//! [`DistanceMatrix`]; the object types exist so that matrices can be built
//! from raw data (vectors, compositions, gridded bivariate CDFs, symmetric
//! matrices such as graph Laplacians).

mod distance;
mod matrix;
mod objects;

pub use distance::{
    composition_distance, euclidean_distance, frobenius_distance, gridded_cdf_l1_distance, metric_distance,
};
pub use matrix::{
    build_distance_matrix, build_distance_matrix_with_workers, validate_distance_matrix, validate_entries,
    DistanceMatrix, ValidationReport, Violation, Warning,
};
pub use objects::{Composition, GridSpec, GriddedCdf, MetricObject, ObjectKind, SymMatrix};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The four built-in metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `||x - y||_2` on vectors.
    Euclidean,
    /// `arccos(<sqrt x, sqrt y>)` on the simplex.
    Composition,
    /// Frobenius norm of `A - B` on symmetric matrices.
    Frobenius,
    /// L1 distance between gridded bivariate CDFs.
    CdfL1,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Composition => "composition",
            Metric::Frobenius => "frobenius",
            Metric::CdfL1 => "cdf-l1",
        }
    }

    /// Whether this metric is defined on objects of `kind`.
    pub fn accepts(self, kind: ObjectKind) -> bool {
        matches!(
            (self, kind),
            (Metric::Euclidean, ObjectKind::Vector)
                | (Metric::Euclidean, ObjectKind::Composition)
                | (Metric::Composition, ObjectKind::Composition)
                | (Metric::Frobenius, ObjectKind::SymMatrix)
                | (Metric::CdfL1, ObjectKind::GriddedCdf)
        )
    }

    /// The metric used for a kind when none is requested explicitly.
    pub fn default_for(kind: ObjectKind) -> Self {
        match kind {
            ObjectKind::Vector => Metric::Euclidean,
            ObjectKind::Composition => Metric::Composition,
            ObjectKind::GriddedCdf => Metric::CdfL1,
            ObjectKind::SymMatrix => Metric::Frobenius,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "composition" | "arccos" => Ok(Metric::Composition),
            "frobenius" => Ok(Metric::Frobenius),
            "cdf-l1" | "cdf_l1" => Ok(Metric::CdfL1),
            other => Err(Error::config(format!(
                "unknown metric '{other}' (expected euclidean, composition, frobenius or cdf-l1)"
            ))),
        }
    }
}
