// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;

use super::argmax_first;
use crate::permutation::NullSample;

/// The scan curve `k -> T(k)` over the admissible splits.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanProfile {
    n: usize,
    c: f64,
    splits: Vec<usize>,
    values: Vec<f64>,
}

impl ScanProfile {
    pub(crate) fn new(n: usize, c: f64, splits: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(splits.len(), values.len());
        Self { n, c, splits, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> f64 {
        self.c
    }

    pub fn splits(&self) -> &[usize] {
        &self.splits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// `(split, value)` of the first maximum.
    pub fn argmax(&self) -> (usize, f64) {
        let s = argmax_first(&self.values);
        (self.splits[s], self.values[s])
    }

    pub fn fraction(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// Two columns, `split_fraction,statistic`, one row per split.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 40);
        for (&k, &v) in self.splits.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", self.fraction(k), v);
        }
        out
    }
}

/// Outcome of one detection run.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub statistic: f64,
    pub tau_index: usize,
    pub tau_fraction: f64,
    /// Absent when no permutation test was run.
    pub p_value: Option<f64>,
    pub permutations: usize,
    pub seed: Option<u64>,
    pub scan: ScanProfile,
    pub null: Option<NullSample>,
}

impl DetectionResult {
    /// Result of the scan alone, without calibration.
    pub fn from_scan(scan: ScanProfile) -> Self {
        let (k, t) = scan.argmax();
        Self {
            statistic: t,
            tau_index: k,
            tau_fraction: scan.fraction(k),
            p_value: None,
            permutations: 0,
            seed: None,
            scan,
            null: None,
        }
    }

    /// Whether the no-change hypothesis is rejected at `alpha` (`p <= alpha`).
    pub fn rejects(&self, alpha: f64) -> Option<bool> {
        self.p_value.map(|p| p <= alpha)
    }

    /// `key = value` lines. Floats use shortest round-trip formatting.
    pub fn to_record(&self, alpha: Option<f64>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.scan.n());
        let _ = writeln!(out, "cutoff = {}", self.scan.cutoff());
        let _ = writeln!(out, "statistic = {}", self.statistic);
        let _ = writeln!(out, "tau_index = {}", self.tau_index);
        let _ = writeln!(out, "tau_fraction = {}", self.tau_fraction);
        match self.p_value {
            Some(p) => {
                let _ = writeln!(out, "p_value = {p}");
            }
            None => {
                let _ = writeln!(out, "p_value = none");
            }
        }
        let _ = writeln!(out, "permutations = {}", self.permutations);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        if let Some(alpha) = alpha {
            let _ = writeln!(out, "alpha = {alpha}");
            if let Some(reject) = self.rejects(alpha) {
                let decision = if reject { "reject" } else { "fail-to-reject" };
                let _ = writeln!(out, "decision = {decision}");
            }
        }
        out
    }
}
