// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pairwise metrics.
//!
//! All four metrics are coordinate sums over a per-object feature vector
//! followed by a scalar finish (`sqrt`, an angle, or a cell-area scale), so a
//! single chunked accumulation kernel serves both the pairwise functions and
//! the matrix builder. Both paths sum in the same order and agree bitwise.

use std::borrow::Cow;
use std::f64::consts::FRAC_PI_2;

use super::objects::{Composition, GriddedCdf, MetricObject, SymMatrix};
use super::Metric;
use crate::error::{Error, Result};

/// Features per accumulation chunk. The matrix builder sweeps all pairs over
/// one chunk before moving on, keeping the working set cache-resident.
pub(crate) const CHUNK: usize = 512;
const LANES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Accumulate {
    SquaredDiff,
    AbsDiff,
}

impl Accumulate {
    pub(crate) fn for_metric(metric: Metric) -> Self {
        match metric {
            Metric::Euclidean | Metric::Frobenius | Metric::Composition => Accumulate::SquaredDiff,
            Metric::CdfL1 => Accumulate::AbsDiff,
        }
    }

    /// Sum over one chunk with `LANES` independent partial sums combined in
    /// a fixed order.
    #[inline]
    pub(crate) fn chunk_sum(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Accumulate::SquaredDiff => lane_sum(a, b, |x, y| (x - y) * (x - y)),
            Accumulate::AbsDiff => lane_sum(a, b, |x, y| (x - y).abs()),
        }
    }
}

#[inline(always)]
fn lane_sum(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            acc[l] += f(xa[l], xb[l]);
        }
    }
    for (l, (&x, &y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        acc[l] += f(x, y);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

/// Coordinate sum over full feature vectors, chunk by chunk.
pub(crate) fn accumulate(kind: Accumulate, a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for (ca, cb) in a.chunks(CHUNK).zip(b.chunks(CHUNK)) {
        total += kind.chunk_sum(ca, cb);
    }
    total
}

/// Raw coordinate sums for every pair `i < j`; row `i` holds `j = i+1..n`.
/// Chunk-major so each chunk of every object is touched while cache-hot.
pub(crate) fn accumulate_chunked_rows(kind: Accumulate, feats: &[&[f64]]) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    let n = feats.len();
    let dim = feats.first().map_or(0, |f| f.len());
    let mut upper: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; n - i - 1]).collect();
    let mut start = 0;
    while start < dim {
        let end = (start + CHUNK).min(dim);
        upper.par_iter_mut().enumerate().for_each(|(i, row)| {
            let a = &feats[i][start..end];
            for (off, acc) in row.iter_mut().enumerate() {
                *acc += kind.chunk_sum(a, &feats[i + 1 + off][start..end]);
            }
        });
        start = end;
    }
    upper
}

/// Turns a raw coordinate sum into the metric value.
pub(crate) fn finish(metric: Metric, raw: f64, cell_area: f64) -> f64 {
    match metric {
        Metric::Euclidean | Metric::Frobenius => raw.max(0.0).sqrt(),
        Metric::CdfL1 => raw * cell_area,
        // For unit vectors u, v: arccos(<u, v>) = 2 asin(|u - v| / 2). The
        // chord form is exact at u = v, where arccos loses half the digits.
        Metric::Composition => (2.0 * (raw.max(0.0).sqrt() / 2.0).min(1.0).asin()).min(FRAC_PI_2),
    }
}

/// Feature vector of an object under `metric`. Frobenius features are the
/// diagonal followed by `sqrt(2)` times the strict upper triangle.
pub(crate) fn features(obj: &MetricObject, metric: Metric) -> Result<Cow<'_, [f64]>> {
    if !metric.accepts(obj.kind()) {
        return Err(Error::config(format!(
            "metric {metric} is not defined on {} objects",
            obj.kind().name()
        )));
    }
    Ok(match obj {
        MetricObject::Vector(v) => Cow::Borrowed(v.as_slice()),
        MetricObject::Composition(c) => match metric {
            Metric::Composition => Cow::Owned(sqrt_parts(c)),
            _ => Cow::Borrowed(c.parts()),
        },
        MetricObject::GriddedCdf(f) => Cow::Borrowed(f.values()),
        MetricObject::SymMatrix(m) => Cow::Owned(matrix_features(m)),
    })
}

fn sqrt_parts(c: &Composition) -> Vec<f64> {
    c.parts().iter().map(|p| p.sqrt()).collect()
}

fn matrix_features(m: &SymMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.diag().len() + m.upper().len());
    out.extend_from_slice(m.diag());
    out.extend(m.upper().iter().map(|v| v * std::f64::consts::SQRT_2));
    out
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dimension(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let raw = accumulate(Accumulate::SquaredDiff, x, y);
    Ok(finish(Metric::Euclidean, raw, 1.0))
}

/// The angle `arccos(sum_k sqrt(x_k y_k))` between the square-root embeddings,
/// clamped to `[0, pi/2]`.
pub fn composition_distance(x: &Composition, y: &Composition) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dimension(format!(
            "compositions with {} and {} parts",
            x.len(),
            y.len()
        )));
    }
    let raw = accumulate(Accumulate::SquaredDiff, &sqrt_parts(x), &sqrt_parts(y));
    Ok(finish(Metric::Composition, raw, 1.0))
}

pub fn frobenius_distance(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::dimension(format!(
            "matrices of order {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let raw = accumulate(Accumulate::SquaredDiff, &matrix_features(a), &matrix_features(b));
    Ok(finish(Metric::Frobenius, raw, 1.0))
}

/// Midpoint-rule approximation of `int int |F - G| du dv` over the grid box.
pub fn gridded_cdf_l1_distance(f: &GriddedCdf, g: &GriddedCdf) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::Grid(format!(
            "CDFs sampled on different grids: {:?} vs {:?}",
            f.grid(),
            g.grid()
        )));
    }
    let raw = accumulate(Accumulate::AbsDiff, f.values(), g.values());
    Ok(finish(Metric::CdfL1, raw, f.grid().cell_area()))
}

/// Dispatches to the pairwise function for `metric`.
pub fn metric_distance(metric: Metric, x: &MetricObject, y: &MetricObject) -> Result<f64> {
    use MetricObject as O;
    match (metric, x, y) {
        (Metric::Euclidean, O::Vector(a), O::Vector(b)) => euclidean_distance(a, b),
        (Metric::Euclidean, O::Composition(a), O::Composition(b)) => euclidean_distance(a.parts(), b.parts()),
        (Metric::Composition, O::Composition(a), O::Composition(b)) => composition_distance(a, b),
        (Metric::Frobenius, O::SymMatrix(a), O::SymMatrix(b)) => frobenius_distance(a, b),
        (Metric::CdfL1, O::GriddedCdf(a), O::GriddedCdf(b)) => gridded_cdf_l1_distance(a, b),
        _ => Err(Error::config(format!(
            "metric {metric} is not defined between {} and {} objects",
            x.kind().name(),
            y.kind().name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn comp(v: &[f64]) -> Composition {
        Composition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let x = [1.5, -2.0, 7.0];
        assert_eq!(euclidean_distance(&x, &x).unwrap(), 0.0);
        assert!(matches!(
            euclidean_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn euclidean_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..30).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..30).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut ss = 0.0;
            for k in 0..30 {
                ss += (x[k] - y[k]).powi(2);
            }
            let d = euclidean_distance(&x, &y).unwrap();
            assert!((d - ss.sqrt()).abs() <= 1e-12, "{d} vs {}", ss.sqrt());
        }
    }

    #[test]
    fn composition_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert_eq!(composition_distance(&x, &x).unwrap(), 0.0);
        let e1 = comp(&[1.0, 0.0, 0.0]);
        let e2 = comp(&[0.0, 1.0, 0.0]);
        assert!((composition_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let d = composition_distance(&comp(&[1.0, 0.0]), &comp(&[0.5, 0.5])).unwrap();
        assert!((d - FRAC_PI_4).abs() < 1e-15);
        let (a, b) = (comp(&[0.1, 0.6, 0.3]), comp(&[0.4, 0.4, 0.2]));
        let inner: f64 = a.parts().iter().zip(b.parts()).map(|(p, q)| (p * q).sqrt()).sum();
        assert!((composition_distance(&a, &b).unwrap() - inner.acos()).abs() < 1e-12);
    }

    #[test]
    fn composition_identity_is_exact() {
        let x = comp(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(composition_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_examples() {
        let i2 = SymMatrix::from_dense(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let z2 = SymMatrix::from_dense(2, &[0.0; 4]).unwrap();
        assert_eq!(frobenius_distance(&i2, &i2).unwrap(), 0.0);
        assert_eq!(frobenius_distance(&i2, &z2).unwrap(), SQRT_2);
        let z3 = SymMatrix::from_dense(3, &[0.0; 9]).unwrap();
        assert!(matches!(frobenius_distance(&i2, &z3), Err(Error::Dimension(_))));
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, SymMatrix) {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-3.0..3.0);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        let m = SymMatrix::from_dense(n, &d).unwrap();
        (d, m)
    }

    #[test]
    fn frobenius_matches_entrywise_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (da, a) = random_sym(&mut rng, 10);
            let (db, b) = random_sym(&mut rng, 10);
            let direct: f64 = da.iter().zip(&db).map(|(x, y)| (x - y).powi(2)).sum();
            let d = frobenius_distance(&a, &b).unwrap();
            assert!((d - direct.sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn cdf_l1_examples() {
        let grid = GridSpec::square(0.0, 1.0, 20);
        let zero = GriddedCdf::from_fn(grid, |_, _| 0.0).unwrap();
        let one = GriddedCdf::from_fn(grid, |_, _| 1.0).unwrap();
        assert_eq!(gridded_cdf_l1_distance(&zero, &zero).unwrap(), 0.0);
        let d = gridded_cdf_l1_distance(&zero, &one).unwrap();
        assert!((d - 1.0).abs() <= grid.cell_area());

        let other = GriddedCdf::from_fn(GridSpec::square(0.0, 2.0, 20), |_, _| 0.0).unwrap();
        assert!(matches!(
            gridded_cdf_l1_distance(&zero, &other),
            Err(Error::Grid(_))
        ));
    }

    fn gaussian_cdf(grid: GridSpec, mx: f64, my: f64) -> GriddedCdf {
        use statrs::distribution::{ContinuousCDF, Normal};
        let phi = Normal::standard();
        GriddedCdf::from_fn(grid, |x, y| phi.cdf(x - mx) * phi.cdf(y - my)).unwrap()
    }

    #[test]
    fn cdf_l1_grid_refinement() {
        let coarse = GridSpec::default();
        let fine = GridSpec::square(-4.0, 4.0, 400);
        let dc = gridded_cdf_l1_distance(&gaussian_cdf(coarse, 0.0, 0.0), &gaussian_cdf(coarse, 1.0, 0.0))
            .unwrap();
        let df =
            gridded_cdf_l1_distance(&gaussian_cdf(fine, 0.0, 0.0), &gaussian_cdf(fine, 1.0, 0.0)).unwrap();
        assert!(((dc - df) / df).abs() < 0.02, "coarse {dc} fine {df}");
    }

    #[test]
    fn metric_dispatch_rejects_incompatible_pairs() {
        let v = MetricObject::Vector(vec![1.0]);
        let c = MetricObject::Composition(comp(&[1.0]));
        assert!(matches!(
            metric_distance(Metric::Frobenius, &v, &v),
            Err(Error::Config(_))
        ));
        assert!(metric_distance(Metric::Euclidean, &v, &c).is_err());
        assert_eq!(metric_distance(Metric::Euclidean, &c, &c).unwrap(), 0.0);
    }
}
