// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multiple change points by seeded binary segmentation.
//!
//! Layer `k` of the seeded collection for a sequence of length `n` holds
//! `n_k = 2 ceil((1/gamma)^(k-1)) - 1` intervals of length
//! `l_k = n gamma^(k-1)`, evenly shifted by `s_k = (n - l_k) / (n_k - 1)`, for
//! `k = 1 ..= ceil(log_{1/gamma} n)`. Intervals are half-open index ranges
//! `[start, end)`.
//!
//! Detection is greedy: one threshold from the permutation null of the whole
//! sequence, then on each segment the seeded interval with the largest scan
//! statistic is split at its argmax if it reaches the threshold, and both
//! halves are processed the same way, left first.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::parallel;
use crate::permutation::{null_sample, PermutationPlan};
use crate::profile_scan::{identity_positions, SortedRows};

/// Slack for floating-point evaluations of ceilings and floors.
const ROUNDING_SLACK: f64 = 1e-9;

pub const DEFAULT_GAMMA: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const DEFAULT_MIN_LEN: usize = 10;
pub const DEFAULT_QUANTILE: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct SeededIntervals {
    pub n: usize,
    pub gamma: f64,
    pub min_len: usize,
    pub intervals: Vec<(usize, usize)>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::config(format!("gamma must lie in [1/2, 1), got {gamma}")));
    }
    Ok(())
}

/// The seeded interval collection, in layer order with duplicates and
/// intervals shorter than `min_len` removed.
pub fn seeded_intervals(n: usize, gamma: f64, min_len: usize) -> Result<SeededIntervals> {
    check_gamma(gamma)?;
    if min_len < 2 {
        return Err(Error::config(format!(
            "min_len must be at least 2, got {min_len}"
        )));
    }
    if n < min_len {
        return Err(Error::config(format!(
            "sequence length {n} is below min_len {min_len}"
        )));
    }
    let nf = n as f64;
    let layers = ((nf.ln() / (1.0 / gamma).ln()) - ROUNDING_SLACK).ceil().max(1.0) as usize;
    let mut seen = HashSet::new();
    let mut intervals = Vec::new();
    for k in 1..=layers {
        let scale = (1.0 / gamma).powi(k as i32 - 1);
        let count = 2 * ((scale - ROUNDING_SLACK).ceil() as usize) - 1;
        let length = nf * gamma.powi(k as i32 - 1);
        let span = ((length - ROUNDING_SLACK).ceil() as usize).min(n);
        let shift = if count > 1 {
            (nf - length) / (count - 1) as f64
        } else {
            0.0
        };
        for i in 0..count {
            let start = ((i as f64 * shift + ROUNDING_SLACK).floor() as usize).min(n);
            let end = (start + span).min(n);
            if end - start >= min_len && seen.insert((start, end)) {
                intervals.push((start, end));
            }
        }
    }
    Ok(SeededIntervals {
        n,
        gamma,
        min_len,
        intervals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentationConfig {
    pub gamma: f64,
    pub min_len: usize,
    /// Cutoff applied within each interval, relative to its length.
    pub c: f64,
    /// Quantile of the full-sequence permutation null used as threshold.
    pub q: f64,
    pub plan: PermutationPlan,
}

impl SegmentationConfig {
    pub fn new(plan: PermutationPlan) -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            min_len: DEFAULT_MIN_LEN,
            c: 0.1,
            q: DEFAULT_QUANTILE,
            plan,
        }
    }

    fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.min_len < 2 {
            return Err(Error::config(format!(
                "min_len must be at least 2, got {}",
                self.min_len
            )));
        }
        if !(self.c > 0.0 && self.c < 0.5) {
            return Err(Error::config(format!(
                "cutoff c must lie in (0, 1/2), got {}",
                self.c
            )));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::argument(format!(
                "quantile must lie in (0, 1), got {}",
                self.q
            )));
        }
        self.plan.validate()
    }
}

/// One detected change point and the interval that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangePoint {
    /// First index of the new segment.
    pub index: usize,
    pub statistic: f64,
    pub interval: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangePointSet {
    pub n: usize,
    pub threshold: f64,
    /// Sorted by index.
    pub points: Vec<ChangePoint>,
}

impl ChangePointSet {
    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.index).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `index,fraction,statistic,interval_start,interval_end` per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.index,
                p.index as f64 / self.n as f64,
                p.statistic,
                p.interval.0,
                p.interval.1
            );
        }
        out
    }
}

/// Best split of one interval: `(statistic, global change index)`, or `None`
/// when the interval is too short for any split.
fn interval_best(d: &DistanceMatrix, start: usize, end: usize, c: f64) -> Result<Option<(f64, usize)>> {
    let len = end - start;
    let edge = ((len as f64 * c - ROUNDING_SLACK).ceil() as usize).max(1);
    if len < 2 * edge {
        return Ok(None);
    }
    let splits: Vec<usize> = (edge..=len - edge).collect();
    let sub = d.submatrix(start, end)?;
    let rows = SortedRows::new(&sub);
    let (t, k) = rows.max_statistic(&identity_positions(len), &splits, false);
    Ok(Some((t, start + k)))
}

/// Greedy seeded binary segmentation against a single global threshold.
pub fn mcpd_dp(d: &DistanceMatrix, config: &SegmentationConfig) -> Result<ChangePointSet> {
    config.validate()?;
    let threshold = null_sample(d, config.c, &config.plan)?.quantile(config.q)?;
    segment_with_threshold(d, config, threshold)
}

/// As [`mcpd_dp`] with a caller-supplied threshold.
pub fn segment_with_threshold(
    d: &DistanceMatrix,
    config: &SegmentationConfig,
    threshold: f64,
) -> Result<ChangePointSet> {
    config.validate()?;
    let mut points = Vec::new();
    parallel::install(config.plan.workers, || {
        recurse(d, config, threshold, 0, d.n(), &mut points)
    })??;
    points.sort_by_key(|p: &ChangePoint| p.index);
    Ok(ChangePointSet {
        n: d.n(),
        threshold,
        points,
    })
}

fn recurse(
    d: &DistanceMatrix,
    config: &SegmentationConfig,
    threshold: f64,
    lo: usize,
    hi: usize,
    out: &mut Vec<ChangePoint>,
) -> Result<()> {
    if hi - lo < config.min_len {
        return Ok(());
    }
    let seeded = seeded_intervals(hi - lo, config.gamma, config.min_len)?;
    let scored = seeded
        .intervals
        .par_iter()
        .map(|&(s, e)| {
            interval_best(d, lo + s, lo + e, config.c).map(|b| b.map(|best| (best, (lo + s, lo + e))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<((f64, usize), (usize, usize))> = None;
    for cand in scored.into_iter().flatten() {
        if best.is_none_or(|b| cand.0 .0 > b.0 .0) {
            best = Some(cand);
        }
    }
    let Some(((statistic, index), interval)) = best else {
        return Ok(());
    };
    // a zero statistic means the interval is internally indistinguishable,
    // even when the threshold is itself zero
    if statistic < threshold || statistic <= 0.0 {
        return Ok(());
    }
    out.push(ChangePoint {
        index,
        statistic,
        interval,
    });
    recurse(d, config, threshold, lo, index, out)?;
    recurse(d, config, threshold, index, hi, out)
}
