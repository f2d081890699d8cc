// SPDX-License-Identifier: MIT OR Apache-2.0

//! Permutation calibration of the scan statistic.
//!
//! Permutation `k` of a plan is drawn by a Fisher-Yates shuffle driven by a
//! ChaCha8 stream keyed by `(seed, k)`, so every permutation is reproducible
//! on its own and the null sample does not depend on how permutations are
//! spread over workers. Relabelling never materialises a permuted matrix: the
//! sorted rows stay fixed and only the segment membership moves.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::parallel;
use crate::profile_scan::{admissible_splits, identity_positions, DetectionResult, ScanProfile, SortedRows};

pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PermutationPlan {
    pub permutations: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
}

impl PermutationPlan {
    pub fn new(permutations: usize, seed: u64) -> Self {
        Self {
            permutations,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.permutations < 1 {
            return Err(Error::config("at least one permutation is required"));
        }
        Ok(())
    }

    /// A warning when `K < 1/alpha`: the smallest attainable p-value
    /// `1/(K+1)` then exceeds `alpha` and the test can never reject.
    pub fn level_warning(&self, alpha: f64) -> Option<String> {
        if (self.permutations as f64) < 1.0 / alpha {
            Some(format!(
                "{} permutations is fewer than 1/alpha = {}; the test cannot reject at level {alpha}",
                self.permutations,
                1.0 / alpha
            ))
        } else {
            None
        }
    }

    /// The `index`-th permutation of `0..n`: entry `a` is the original index
    /// of the observation placed at position `a`.
    pub fn permutation(&self, index: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        perm
    }
}

/// Permuted statistics in permutation-index order, plus the observed value.
#[derive(Clone, Debug, PartialEq)]
pub struct NullSample {
    pub observed: f64,
    pub values: Vec<f64>,
}

impl NullSample {
    /// `(1 + #{k : T_k >= T_obs}) / (K + 1)`; the identity ordering counts.
    pub fn p_value(&self) -> f64 {
        let exceed = self.values.iter().filter(|&&v| v >= self.observed).count();
        (1 + exceed) as f64 / (self.values.len() + 1) as f64
    }

    /// Nearest-rank quantile: the `ceil(q K)`-th smallest permuted value.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::argument(format!("quantile must lie in (0, 1), got {q}")));
        }
        if self.values.is_empty() {
            return Err(Error::argument("empty null sample"));
        }
        let k = self.values.len();
        let rank = ((q * k as f64 - 1e-9).ceil() as usize).clamp(1, k);
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(sorted[rank - 1])
    }

    /// One value per line, permutation-index order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 22);
        for v in &self.values {
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::argument(format!(
            "permutation of length {} for {n} observations",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::argument(format!("not a permutation of 0..{n}: {perm:?}")));
        }
    }
    Ok(())
}

fn positions_of(perm: &[usize]) -> Vec<u32> {
    let mut pos = vec![0u32; perm.len()];
    for (a, &orig) in perm.iter().enumerate() {
        pos[orig] = a as u32;
    }
    pos
}

/// Sorted rows and admissible splits, shared by every relabelling.
struct NullEngine {
    rows: SortedRows,
    splits: Vec<usize>,
    c: f64,
}

impl NullEngine {
    fn new(d: &DistanceMatrix, c: f64) -> Result<Self> {
        let splits = admissible_splits(d.n(), c)?.collect();
        Ok(Self {
            rows: SortedRows::new(d),
            splits,
            c,
        })
    }

    fn observed(&self) -> ScanProfile {
        let n = self.rows.n();
        let values = self.rows.statistics(&identity_positions(n), &self.splits, true);
        ScanProfile::new(n, self.c, self.splits.clone(), values)
    }

    fn permuted(&self, perm: &[usize]) -> f64 {
        self.rows
            .max_statistic(&positions_of(perm), &self.splits, false)
            .0
    }

    fn null_values(&self, plan: &PermutationPlan) -> Result<Vec<f64>> {
        let n = self.rows.n();
        parallel::install(plan.workers, || {
            (0..plan.permutations)
                .into_par_iter()
                .map(|k| self.permuted(&plan.permutation(k, n)))
                .collect()
        })
    }
}

/// Test statistic of the sequence reordered as `perm` (position `a` holds
/// observation `perm[a]`).
pub fn permuted_statistic(d: &DistanceMatrix, perm: &[usize], c: f64) -> Result<f64> {
    check_permutation(perm, d.n())?;
    Ok(NullEngine::new(d, c)?.permuted(perm))
}

/// Scan, estimate, and calibrate by `plan.permutations` random relabellings.
pub fn permutation_test(d: &DistanceMatrix, c: f64, plan: &PermutationPlan) -> Result<DetectionResult> {
    plan.validate()?;
    let engine = NullEngine::new(d, c)?;
    let values = engine.null_values(plan)?;
    let mut result = DetectionResult::from_scan(engine.observed());
    let null = NullSample {
        observed: result.statistic,
        values,
    };
    result.p_value = Some(null.p_value());
    result.permutations = plan.permutations;
    result.seed = Some(plan.seed);
    result.null = Some(null);
    Ok(result)
}

/// Permuted statistics of the full sequence, without the observed scan.
pub fn null_sample(d: &DistanceMatrix, c: f64, plan: &PermutationPlan) -> Result<NullSample> {
    plan.validate()?;
    let engine = NullEngine::new(d, c)?;
    let observed = engine.observed().argmax().1;
    Ok(NullSample {
        observed,
        values: engine.null_values(plan)?,
    })
}

/// Nearest-rank `q`-quantile of the permutation null of the full sequence.
pub fn null_quantile(d: &DistanceMatrix, c: f64, plan: &PermutationPlan, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::argument(format!("quantile must lie in (0, 1), got {q}")));
    }
    null_sample(d, c, plan)?.quantile(q)
}
