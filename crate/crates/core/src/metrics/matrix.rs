// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distance::{accumulate_chunked_rows, features, finish, Accumulate};
use super::objects::MetricObject;
use super::Metric;
use crate::error::{Error, Result};
use crate::parallel;

const TRIANGLE_SAMPLES: usize = 1000;
const TRIANGLE_SLACK: f64 = 1e-9;

/// Dense symmetric matrix of pairwise distances, row-major with both
/// triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    source_metric: String,
}

impl DistanceMatrix {
    /// Wraps row-major entries, rejecting anything that is not exactly
    /// symmetric with a zero diagonal and finite nonnegative entries.
    pub fn new(n: usize, entries: Vec<f64>, source_metric: impl Into<String>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::dimension(format!(
                "distance matrix of order {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let report = check_square(n, &entries, false);
        if let Some(v) = report.violations.first() {
            return Err(Error::input(format!(
                "not a distance matrix: {v} ({} violation(s) in total)",
                report.violations.len()
            )));
        }
        Ok(Self {
            n,
            entries,
            source_metric: source_metric.into(),
        })
    }

    /// From a list of rows, as read from a delimited file.
    pub fn from_rows(rows: &[Vec<f64>], source_metric: impl Into<String>) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::dimension(format!(
                "row {i} has {} entries; a matrix with {n} rows must be square",
                r.len()
            )));
        }
        Self::new(n, rows.concat(), source_metric)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn source_metric(&self) -> &str {
        &self.source_metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n.max(1))
    }

    /// The matrix of observations `start..end`.
    pub fn submatrix(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.n {
            return Err(Error::argument(format!(
                "submatrix range {start}..{end} outside 0..{}",
                self.n
            )));
        }
        let m = end - start;
        let mut entries = Vec::with_capacity(m * m);
        for i in start..end {
            entries.extend_from_slice(&self.row(i)[start..end]);
        }
        Ok(Self {
            n: m,
            entries,
            source_metric: self.source_metric.clone(),
        })
    }

    /// Relabels observations: entry `(a, b)` of the result is
    /// `self[perm[a], perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::permutation::check_permutation(perm, self.n)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for &pa in perm {
            let row = self.row(pa);
            entries.extend(perm.iter().map(|&pb| row[pb]));
        }
        Ok(Self {
            n,
            entries,
            source_metric: self.source_metric.clone(),
        })
    }

    /// Observation order reversed.
    pub fn reversed(&self) -> Self {
        let perm: Vec<usize> = (0..self.n).rev().collect();
        self.permuted(&perm).expect("reversal is a permutation")
    }

    /// Every entry multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::argument(format!(
                "scale factor must be finite and positive, got {factor}"
            )));
        }
        Ok(Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * factor).collect(),
            source_metric: self.source_metric.clone(),
        })
    }
}

/// Builds the pairwise distance matrix of a homogeneous object sequence.
pub fn build_distance_matrix(objects: &[MetricObject], metric: Metric) -> Result<DistanceMatrix> {
    build_distance_matrix_with_workers(objects, metric, None)
}

/// As [`build_distance_matrix`] on a pool of `workers` threads (`None` uses
/// the global pool). The result does not depend on the worker count.
pub fn build_distance_matrix_with_workers(
    objects: &[MetricObject],
    metric: Metric,
    workers: Option<usize>,
) -> Result<DistanceMatrix> {
    let n = objects.len();
    let Some(first) = objects.first() else {
        return DistanceMatrix::new(0, Vec::new(), metric.label());
    };
    let kind = first.kind();
    if let Some((i, o)) = objects.iter().enumerate().find(|(_, o)| o.kind() != kind) {
        return Err(Error::input(format!(
            "object {i} is a {} but object 0 is a {}; sequences must be homogeneous",
            o.kind().name(),
            kind.name()
        )));
    }
    if !metric.accepts(kind) {
        return Err(Error::config(format!(
            "metric {metric} is not defined on {} objects",
            kind.name()
        )));
    }
    let cell_area = match first {
        MetricObject::GriddedCdf(f) => {
            if let Some((i, _)) = objects.iter().enumerate().find(|(_, o)| match o {
                MetricObject::GriddedCdf(g) => g.grid() != f.grid(),
                _ => true,
            }) {
                return Err(Error::Grid(format!(
                    "object {i} is sampled on a different grid than object 0"
                )));
            }
            f.grid().cell_area()
        }
        _ => 1.0,
    };

    let feats = objects
        .iter()
        .map(|o| features(o, metric))
        .collect::<Result<Vec<_>>>()?;
    let dim = feats[0].len();
    if let Some((i, f)) = feats.iter().enumerate().find(|(_, f)| f.len() != dim) {
        return Err(Error::dimension(format!(
            "object {i} has {} coordinates, object 0 has {dim}",
            f.len()
        )));
    }
    let flat: Vec<&[f64]> = feats.iter().map(|f| f.as_ref()).collect();

    let kind = Accumulate::for_metric(metric);
    let upper = parallel::install(workers, || accumulate_chunked_rows(kind, &flat))?;

    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &raw) in row.iter().enumerate() {
            let j = i + 1 + off;
            let d = finish(metric, raw, cell_area);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix::new(n, entries, metric.label())
}

/// A hard defect in a candidate distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },
    Diagonal {
        i: usize,
        value: f64,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    NonFinite {
        i: usize,
        j: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::Asymmetric { i, j, upper, lower } => {
                write!(f, "asymmetric at ({i}, {j}): {upper} vs {lower}")
            }
            Violation::Diagonal { i, value } => write!(f, "nonzero diagonal at {i}: {value}"),
            Violation::Negative { i, j, value } => write!(f, "negative entry at ({i}, {j}): {value}"),
            Violation::NonFinite { i, j } => write!(f, "non-finite entry at ({i}, {j})"),
        }
    }
}

/// A soft finding; user-supplied dissimilarities may be semimetrics.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Triangle { i, j, k, excess } => write!(
                f,
                "triangle inequality fails on ({i}, {j}, {k}): d(i,k) exceeds d(i,j)+d(j,k) by {excess}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
    pub triangles_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_distance_matrix(m: &DistanceMatrix) -> ValidationReport {
    check_square(m.n, &m.entries, true)
}

/// Validates a raw row list that may not even be square.
pub fn validate_entries(rows: &[Vec<f64>]) -> ValidationReport {
    let n = rows.len();
    let shape: Vec<Violation> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.len() != n)
        .map(|(row, r)| Violation::NotSquare {
            row,
            len: r.len(),
            expected: n,
        })
        .collect();
    if !shape.is_empty() {
        return ValidationReport {
            n,
            violations: shape,
            ..Default::default()
        };
    }
    check_square(n, &rows.concat(), true)
}

fn check_square(n: usize, e: &[f64], triangles: bool) -> ValidationReport {
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = e[i * n + j];
            if !v.is_finite() {
                violations.push(Violation::NonFinite { i, j });
                continue;
            }
            if i == j {
                if v != 0.0 {
                    violations.push(Violation::Diagonal { i, value: v });
                }
                continue;
            }
            if v < 0.0 {
                violations.push(Violation::Negative { i, j, value: v });
            }
            if i < j {
                let w = e[j * n + i];
                if v != w && w.is_finite() {
                    violations.push(Violation::Asymmetric {
                        i,
                        j,
                        upper: v,
                        lower: w,
                    });
                }
            }
        }
    }
    let mut report = ValidationReport {
        n,
        violations,
        ..Default::default()
    };
    if triangles && report.violations.is_empty() && n >= 3 {
        spot_check_triangles(n, e, &mut report);
    }
    report
}

fn spot_check_triangles(n: usize, e: &[f64], report: &mut ValidationReport) {
    let check = |i: usize, j: usize, k: usize, report: &mut ValidationReport| {
        let direct = e[i * n + k];
        let detour = e[i * n + j] + e[j * n + k];
        let excess = direct - detour;
        if excess > TRIANGLE_SLACK * direct.max(1.0) {
            report.warnings.push(Warning::Triangle { i, j, k, excess });
        }
        report.triangles_checked += 1;
    };
    if n * n * n <= TRIANGLE_SAMPLES {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    check(i, j, k, report);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7269_616e_676c_6573);
        for _ in 0..TRIANGLE_SAMPLES {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            check(i, j, k, report);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{metric_distance, Composition, GridSpec, GriddedCdf, SymMatrix};

    fn vectors(vals: &[f64]) -> Vec<MetricObject> {
        vals.iter().map(|v| MetricObject::Vector(vec![*v])).collect()
    }

    #[test]
    fn identical_vectors_give_zero_matrix() {
        let objs = vec![MetricObject::Vector(vec![1.0, 2.0]); 3];
        let m = build_distance_matrix(&objs, Metric::Euclidean).unwrap();
        assert_eq!(m.entries(), &[0.0; 9]);
    }

    #[test]
    fn scalar_differences() {
        let m = build_distance_matrix(&vectors(&[0.0, 1.0, 3.0]), Metric::Euclidean).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 2), 2.0);
        assert_eq!(m.get(2, 1), 2.0);
        assert_eq!(m.source_metric(), "euclidean");
    }

    #[test]
    fn heterogeneous_and_incompatible_inputs() {
        let mut objs = vectors(&[0.0, 1.0]);
        objs.push(MetricObject::Composition(Composition::new(vec![1.0]).unwrap()));
        assert!(matches!(
            build_distance_matrix(&objs, Metric::Euclidean),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            build_distance_matrix(&vectors(&[0.0, 1.0]), Metric::Frobenius),
            Err(Error::Config(_))
        ));
        let ragged = vec![
            MetricObject::Vector(vec![0.0]),
            MetricObject::Vector(vec![0.0, 1.0]),
        ];
        assert!(matches!(
            build_distance_matrix(&ragged, Metric::Euclidean),
            Err(Error::Dimension(_))
        ));
        let cdfs = vec![
            MetricObject::GriddedCdf(GriddedCdf::from_fn(GridSpec::square(0.0, 1.0, 3), |_, _| 1.0).unwrap()),
            MetricObject::GriddedCdf(GriddedCdf::from_fn(GridSpec::square(0.0, 2.0, 3), |_, _| 1.0).unwrap()),
        ];
        assert!(matches!(
            build_distance_matrix(&cdfs, Metric::CdfL1),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn builder_matches_pairwise_metric_bitwise() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let objs: Vec<MetricObject> = (0..100)
            .map(|_| MetricObject::Vector((0..700).map(|_| rng.random::<f64>()).collect()))
            .collect();
        let m = build_distance_matrix(&objs, Metric::Euclidean).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let d = metric_distance(Metric::Euclidean, &objs[i], &objs[j]).unwrap();
                assert_eq!(m.get(i, j), if i == j { 0.0 } else { d });
            }
        }
        assert!(validate_distance_matrix(&m).is_valid());
    }

    #[test]
    fn builder_independent_of_workers() {
        let mats: Vec<MetricObject> = (0..12)
            .map(|s| {
                let d = 40;
                let mut dense = vec![0.0; d * d];
                for i in 0..d {
                    for j in i..d {
                        let v = ((i * 31 + j * 17 + s * 7) % 13) as f64 - 6.0;
                        dense[i * d + j] = v;
                        dense[j * d + i] = v;
                    }
                }
                MetricObject::SymMatrix(SymMatrix::from_dense(d, &dense).unwrap())
            })
            .collect();
        let a = build_distance_matrix_with_workers(&mats, Metric::Frobenius, Some(1)).unwrap();
        let b = build_distance_matrix_with_workers(&mats, Metric::Frobenius, Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validation_reports() {
        let ok = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(validate_entries(&ok).is_valid());

        let asym = vec![vec![0.0, 1.0, 2.0], vec![1.5, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let r = validate_entries(&asym);
        assert_eq!(
            r.violations,
            vec![Violation::Asymmetric {
                i: 0,
                j: 1,
                upper: 1.0,
                lower: 1.5
            }]
        );

        let mut diag = vec![vec![0.0; 3]; 3];
        diag[2][2] = 0.5;
        assert_eq!(
            validate_entries(&diag).violations,
            vec![Violation::Diagonal { i: 2, value: 0.5 }]
        );

        let ragged = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(
            validate_entries(&ragged).violations[0],
            Violation::NotSquare { row: 1, .. }
        ));

        let neg = vec![vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert_eq!(validate_entries(&neg).violations.len(), 2);
        let nan = vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]];
        assert!(!validate_entries(&nan).is_valid());
    }

    #[test]
    fn triangle_failures_are_warnings() {
        // squared distances of 0, 1, 2 on a line: 1 + 1 < 4
        let sq = vec![vec![0.0, 1.0, 4.0], vec![1.0, 0.0, 1.0], vec![4.0, 1.0, 0.0]];
        let r = validate_entries(&sq);
        assert!(r.is_valid());
        assert!(!r.warnings.is_empty());
        assert!(DistanceMatrix::from_rows(&sq, "squared").is_ok());
    }

    #[test]
    fn strict_constructor_rejects_defects() {
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]], "x").is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0]], "x").is_err());
    }

    #[test]
    fn relabelling_helpers() {
        let m = build_distance_matrix(&vectors(&[0.0, 1.0, 3.0, 7.0]), Metric::Euclidean).unwrap();
        let r = m.reversed();
        assert_eq!(r.get(0, 1), m.get(3, 2));
        let s = m.submatrix(1, 3).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.get(0, 1), 2.0);
        let p = m.permuted(&[2, 0, 3, 1]).unwrap();
        assert_eq!(p.get(0, 2), m.get(2, 3));
        assert!(m.permuted(&[0, 0, 1, 2]).is_err());
        assert_eq!(m.scaled(2.0).unwrap().get(0, 3), 14.0);
        assert!(m.scaled(0.0).is_err());
    }
}
