// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reference implementations and instance generators shared by the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use distcp::DistanceMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `int (F1 - F2)^2` for observation `i` by sorting labelled distances and
/// sweeping, with segment one given by `first[j]`.
pub fn reference_integral(d: &DistanceMatrix, i: usize, first: &[bool]) -> f64 {
    let n = d.n();
    let k = first.iter().filter(|f| **f).count();
    let mut labelled: Vec<(f64, bool)> = (0..n).map(|j| (d.get(i, j), first[j])).collect();
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut c1, mut c2) = (0usize, 0usize);
    let mut total = 0.0;
    let mut g = 0;
    while g < n {
        let t = labelled[g].0;
        // absorb every entry at this breakpoint before integrating onwards
        while g < n && labelled[g].0 == t {
            if labelled[g].1 {
                c1 += 1;
            } else {
                c2 += 1;
            }
            g += 1;
        }
        if g < n {
            let diff = c1 as f64 / k as f64 - c2 as f64 / (n - k) as f64;
            total += diff * diff * (labelled[g].0 - t);
        }
    }
    total
}

/// `T(k) = k (n - k) / n^2 * sum_i int (F1_i - F2_i)^2`.
pub fn reference_statistic(d: &DistanceMatrix, k: usize) -> f64 {
    let n = d.n();
    let first: Vec<bool> = (0..n).map(|j| j < k).collect();
    let sum: f64 = (0..n).map(|i| reference_integral(d, i, &first)).sum();
    (k * (n - k)) as f64 / (n * n) as f64 * sum
}

/// Rectangle-rule integral of `(F1 - F2)^2` on `points` cells over
/// `[0, max distance]`.
pub fn dense_grid_integral(d: &DistanceMatrix, i: usize, first: &[bool], points: usize) -> f64 {
    let n = d.n();
    let k = first.iter().filter(|f| **f).count();
    let row: Vec<f64> = (0..n).map(|j| d.get(i, j)).collect();
    let top = row.iter().cloned().fold(0.0, f64::max);
    let h = top / points as f64;
    let mut total = 0.0;
    for s in 0..points {
        let t = (s as f64 + 0.5) * h;
        let c1 = (0..n).filter(|&j| first[j] && row[j] <= t).count();
        let c2 = (0..n).filter(|&j| !first[j] && row[j] <= t).count();
        let diff = c1 as f64 / k as f64 - c2 as f64 / (n - k) as f64;
        total += diff * diff * h;
    }
    total
}

pub fn from_points(points: &[Vec<f64>]) -> DistanceMatrix {
    let n = points.len();
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    DistanceMatrix::new(n, e, "euclidean").unwrap()
}

pub fn line(ys: &[f64]) -> DistanceMatrix {
    from_points(&ys.iter().map(|&y| vec![y]).collect::<Vec<_>>())
}

/// A random instance: Euclidean points, a dissimilarity with many ties, or
/// an arbitrary symmetric nonnegative matrix, depending on `seed`.
pub fn random_matrix(seed: u64, n: usize) -> DistanceMatrix {
    let mut r = rng(seed);
    match seed % 3 {
        0 => {
            let dim = r.random_range(1..5);
            let shift_at = r.random_range(1..n);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..dim)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut r);
                            z + if i >= shift_at { 1.0 } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            from_points(&pts)
        }
        1 => {
            let ys: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64).collect();
            line(&ys)
        }
        _ => {
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    let v: f64 = r.random::<f64>() * 10.0;
                    e[i * n + j] = v;
                    e[j * n + i] = v;
                }
            }
            DistanceMatrix::new(n, e, "random").unwrap()
        }
    }
}

pub fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

/// Relative or absolute agreement to `tol`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
