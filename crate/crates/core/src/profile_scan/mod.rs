// SPDX-License-Identifier: MIT OR Apache-2.0

//! Distance-profile scan statistic.
//!
//! For a split `k`, observation `i` gets two empirical distance profiles: the
//! CDF of its distances to the first `k` observations and the CDF of its
//! distances to the remaining `n - k`. Self-distances count, so observation
//! `i` contributes the atom at zero to whichever segment it belongs to. The
//! statistic at `k` is
//!
//! ```text
//! T(k) = k (n - k) / n * (1/n) * sum_i  int (F1_i(t) - F2_i(t))^2 dt
//! ```
//!
//! evaluated exactly (the integrands are step functions). The test statistic
//! is the maximum of `T` over the admissible splits and the change-point
//! estimate is the smallest split attaining it.
//!
//! Rows are sorted once per matrix ([`SortedRows`]); every split and every
//! relabelling of the sequence reuses them, because a relabelling only moves
//! observations between segments.

mod kernel;
mod result;

pub use result::{DetectionResult, ScanProfile};

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use kernel::{palindromic_sum, row_block, row_single, LANES};

/// Distances from one observation to all `n`, ascending, with the column each
/// came from. Ties are ordered by column.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedRow {
    distances: Vec<f64>,
    columns: Vec<usize>,
}

impl SortedRow {
    pub fn new(row: &[f64]) -> Self {
        let mut columns: Vec<usize> = (0..row.len()).collect();
        columns.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        let distances = columns.iter().map(|&c| row[c]).collect();
        Self { distances, columns }
    }

    pub fn from_matrix(d: &DistanceMatrix, i: usize) -> Self {
        Self::new(d.row(i))
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    fn widths(&self) -> Vec<f64> {
        gap_widths(&self.distances)
    }
}

fn gap_widths(sorted: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = sorted.windows(2).map(|p| p[1] - p[0]).collect();
    if !sorted.is_empty() {
        w.push(0.0);
    }
    w
}

/// All rows of a distance matrix in sorted form, stored as gap widths and
/// source columns. Immutable once built and shared freely across workers.
#[derive(Clone, Debug)]
pub struct SortedRows {
    n: usize,
    widths: Vec<f64>,
    columns: Vec<u32>,
}

impl SortedRows {
    pub fn new(d: &DistanceMatrix) -> Self {
        let n = d.n();
        let mut widths = Vec::with_capacity(n * n);
        let mut columns = Vec::with_capacity(n * n);
        let mut order: Vec<u32> = Vec::with_capacity(n);
        for i in 0..n {
            let row = d.row(i);
            order.clear();
            order.extend(0..n as u32);
            order.sort_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b)));
            for g in 0..n {
                let here = row[order[g] as usize];
                let next = order.get(g + 1).map_or(here, |&c| row[c as usize]);
                widths.push(next - here);
            }
            columns.extend_from_slice(&order);
        }
        Self { n, widths, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> (&[f64], &[u32]) {
        let r = i * self.n..(i + 1) * self.n;
        (&self.widths[r.clone()], &self.columns[r])
    }

    /// `Q_i(k)` for every row and every split; `out[i][s]` pairs row `i` with
    /// `splits[s]`. `positions[j]` is the sequence position of observation `j`.
    fn row_values(&self, positions: &[u32], splits: &[usize], parallel: bool) -> Vec<Vec<f64>> {
        let n = self.n;
        let nf = n as f64;
        let blocks: Vec<[f64; LANES]> = splits
            .chunks(LANES)
            .map(|chunk| {
                let mut b = [*chunk.last().unwrap() as f64; LANES];
                for (l, &k) in chunk.iter().enumerate() {
                    b[l] = k as f64;
                }
                b
            })
            .collect();
        let one_row = |i: usize, scratch: &mut Vec<f64>| -> Vec<f64> {
            let (widths, cols) = self.row(i);
            scratch.clear();
            scratch.extend(cols.iter().map(|&c| positions[c as usize] as f64));
            let mut out = Vec::with_capacity(splits.len());
            for (b, block) in blocks.iter().enumerate() {
                let q = row_block(widths, scratch, block, nf);
                let take = (splits.len() - b * LANES).min(LANES);
                out.extend_from_slice(&q[..take]);
            }
            out
        };
        if parallel {
            (0..n)
                .into_par_iter()
                .map_init(|| Vec::with_capacity(n), |scratch, i| one_row(i, scratch))
                .collect()
        } else {
            let mut scratch = Vec::with_capacity(n);
            (0..n).map(|i| one_row(i, &mut scratch)).collect()
        }
    }

    /// `T(k)` at each split for the sequence ordered by `positions`.
    pub(crate) fn statistics(&self, positions: &[u32], splits: &[usize], parallel: bool) -> Vec<f64> {
        let per_row = self.row_values(positions, splits, parallel);
        let n = self.n;
        let n2 = (n * n) as f64;
        let mut column = vec![0.0; n];
        splits
            .iter()
            .enumerate()
            .map(|(s, &k)| {
                for (c, row) in column.iter_mut().zip(&per_row) {
                    *c = row[s];
                }
                palindromic_sum(&column) / (n2 * (k * (n - k)) as f64)
            })
            .collect()
    }

    /// Maximum of `T` over `splits` and the smallest split attaining it.
    pub(crate) fn max_statistic(&self, positions: &[u32], splits: &[usize], parallel: bool) -> (f64, usize) {
        let values = self.statistics(positions, splits, parallel);
        let s = argmax_first(&values);
        (values[s], splits[s])
    }
}

/// Index of the first maximum.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (s, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = s;
        }
    }
    best
}

pub(crate) fn identity_positions(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}

/// Admissible splits `ceil(n c) ..= n - ceil(n c)` for a cutoff `c` in `(0, 1/2)`.
pub fn admissible_splits(n: usize, c: f64) -> Result<RangeInclusive<usize>> {
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::config(format!("cutoff c must lie in (0, 1/2), got {c}")));
    }
    let edge = ((n as f64 * c - 1e-9).ceil() as usize).max(1);
    if n < 2 * edge {
        return Err(Error::config(format!(
            "no admissible split for n = {n} with cutoff {c}"
        )));
    }
    Ok(edge..=n - edge)
}

fn check_split(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::argument(format!(
            "split {k} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `int (F1 - F2)^2 dt` for one observation's sorted row, where
/// `in_first_segment[j]` says whether observation `j` is among the `k` members
/// of segment one.
pub fn profile_integral(row: &SortedRow, in_first_segment: &[bool], k: usize) -> Result<f64> {
    let n = row.len();
    check_split(n, k)?;
    if in_first_segment.len() != n {
        return Err(Error::argument(format!(
            "{} membership flags for a row of length {n}",
            in_first_segment.len()
        )));
    }
    let members = in_first_segment.iter().filter(|f| **f).count();
    if members != k {
        return Err(Error::argument(format!(
            "{members} observations flagged for segment one, expected {k}"
        )));
    }
    let flags = row.columns.iter().map(|&c| in_first_segment[c]);
    let q = row_single(&row.widths(), flags, k, n);
    let scale = (k * (n - k)) as f64;
    Ok(q / (scale * scale))
}

/// `T(k)`: segment one is observations `0..k`.
pub fn scan_statistic_at(d: &DistanceMatrix, k: usize) -> Result<f64> {
    let n = d.n();
    check_split(n, k)?;
    let rows = SortedRows::new(d);
    Ok(rows.statistics(&identity_positions(n), &[k], false)[0])
}

/// `T(k)` over every admissible split for cutoff `c`.
pub fn scan_curve(d: &DistanceMatrix, c: f64) -> Result<ScanProfile> {
    let rows = SortedRows::new(d);
    scan_curve_sorted(&rows, c)
}

pub(crate) fn scan_curve_sorted(rows: &SortedRows, c: f64) -> Result<ScanProfile> {
    let n = rows.n();
    let splits: Vec<usize> = admissible_splits(n, c)?.collect();
    let values = rows.statistics(&identity_positions(n), &splits, true);
    Ok(ScanProfile::new(n, c, splits, values))
}

/// Test statistic and change-point estimate `(max_k T(k), argmax)`.
pub fn max_scan(d: &DistanceMatrix, c: f64) -> Result<(f64, usize)> {
    let profile = scan_curve(d, c)?;
    let (k, t) = profile.argmax();
    Ok((t, k))
}

/// Plug-in estimate of the profile divergence between observations `0..m`
/// and `m..n`: the mean profile integral over each sample, summed.
pub fn delta_estimate(d: &DistanceMatrix, m: usize) -> Result<f64> {
    let n = d.n();
    if m < 2 || m + 2 > n {
        return Err(Error::argument(format!(
            "first-sample size {m} outside 2..={}",
            n.saturating_sub(2)
        )));
    }
    let rows = SortedRows::new(d);
    let per_row = rows.row_values(&identity_positions(n), &[m], false);
    let scale = ((m * (n - m)) as f64).powi(2);
    let (first, second) = per_row.split_at(m);
    let mean = |rs: &[Vec<f64>]| rs.iter().map(|r| r[0] / scale).sum::<f64>() / rs.len() as f64;
    Ok(mean(first) + mean(second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(ys: &[f64]) -> DistanceMatrix {
        let n = ys.len();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = (ys[i] - ys[j]).abs();
            }
        }
        DistanceMatrix::new(n, e, "euclidean").unwrap()
    }

    #[test]
    fn hand_computed_fixture() {
        let d = line(&[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(scan_statistic_at(&d, 2).unwrap(), 1.0);
        assert_eq!(delta_estimate(&d, 2).unwrap(), 2.0);
        let row = SortedRow::from_matrix(&d, 0);
        let flags = [true, true, false, false];
        assert_eq!(profile_integral(&row, &flags, 2).unwrap(), 1.0);
        let (t, k) = max_scan(&d, 0.25).unwrap();
        assert_eq!((t, k), (1.0, 2));
        let curve = scan_curve(&d, 0.25).unwrap();
        assert_eq!(curve.splits(), &[1, 2, 3]);
        assert!(curve.values()[0] < 1.0 && curve.values()[2] < 1.0);
    }

    #[test]
    fn constant_sequence_is_flat_zero() {
        let d = line(&[2.0; 12]);
        let curve = scan_curve(&d, 0.1).unwrap();
        assert!(curve.values().iter().all(|&v| v == 0.0));
        assert_eq!(max_scan(&d, 0.1).unwrap(), (0.0, 2));
        let row = SortedRow::from_matrix(&d, 3);
        let mut flags = vec![false; 12];
        flags[..5].iter_mut().for_each(|f| *f = true);
        assert_eq!(profile_integral(&row, &flags, 5).unwrap(), 0.0);
    }

    #[test]
    fn argument_errors() {
        let d = line(&[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(scan_statistic_at(&d, 0), Err(Error::Argument(_))));
        assert!(matches!(scan_statistic_at(&d, 4), Err(Error::Argument(_))));
        assert!(matches!(scan_curve(&d, 0.5), Err(Error::Config(_))));
        assert!(matches!(scan_curve(&d, 0.0), Err(Error::Config(_))));
        assert!(matches!(delta_estimate(&d, 1), Err(Error::Argument(_))));
        assert!(matches!(delta_estimate(&d, 3), Err(Error::Argument(_))));
        let row = SortedRow::from_matrix(&d, 0);
        assert!(profile_integral(&row, &[true, false, false, false], 2).is_err());
        assert!(profile_integral(&row, &[true, true], 2).is_err());
    }

    #[test]
    fn admissible_split_ranges() {
        assert_eq!(admissible_splits(4, 0.25).unwrap(), 1..=3);
        assert_eq!(admissible_splits(120, 0.1).unwrap(), 12..=108);
        assert_eq!(admissible_splits(300, 0.1).unwrap(), 30..=270);
        assert_eq!(admissible_splits(10, 0.01).unwrap(), 1..=9);
        assert!(admissible_splits(1, 0.3).is_err());
    }

    #[test]
    fn sorted_row_invariants() {
        let d = line(&[3.0, 1.0, 2.0, 1.0]);
        let row = SortedRow::from_matrix(&d, 1);
        assert_eq!(row.distances(), &[0.0, 0.0, 1.0, 2.0]);
        assert_eq!(row.columns(), &[1, 3, 2, 0]);
    }

    #[test]
    fn blocked_and_single_split_paths_agree() {
        let ys: Vec<f64> = (0..23).map(|i| ((i * 7919) % 31) as f64 / 7.0).collect();
        let d = line(&ys);
        let curve = scan_curve(&d, 0.1).unwrap();
        for (&k, &v) in curve.splits().iter().zip(curve.values()) {
            assert_eq!(scan_statistic_at(&d, k).unwrap(), v);
        }
    }
}
