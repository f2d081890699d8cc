// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, Family, ScenarioSpec};
use crate::error::{Error, Result};
use crate::metrics::build_distance_matrix;
use crate::parallel;
use crate::permutation::{permutation_test, PermutationPlan, DEFAULT_ALPHA};
use crate::segmentation::{mcpd_dp, SegmentationConfig, DEFAULT_GAMMA, DEFAULT_MIN_LEN, DEFAULT_QUANTILE};

/// A Monte Carlo study over a grid of effects, as read from a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub scenario: ScenarioSpec,
    /// Effect grid; empty runs the scenario's own effect only.
    #[serde(default)]
    pub effects: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_cutoff")]
    pub c: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_min_len")]
    pub min_len: usize,
    #[serde(default = "default_quantile")]
    pub q: f64,
    /// Master seed; replicate `r` derives its data and permutation seeds from
    /// `(seed, r)`, shared across the effect grid.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Record wall-clock seconds; otherwise the column is zero so that output
    /// bytes depend only on the inputs.
    #[serde(default)]
    pub timing: bool,
}

fn default_replicates() -> usize {
    200
}
fn default_permutations() -> usize {
    199
}
fn default_cutoff() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_min_len() -> usize {
    DEFAULT_MIN_LEN
}
fn default_quantile() -> f64 {
    DEFAULT_QUANTILE
}

impl StudySpec {
    pub fn new(scenario: ScenarioSpec, effects: Vec<f64>, replicates: usize) -> Self {
        Self {
            scenario,
            effects,
            replicates,
            permutations: default_permutations(),
            c: default_cutoff(),
            alpha: default_alpha(),
            gamma: default_gamma(),
            min_len: default_min_len(),
            q: default_quantile(),
            seed: 0,
            workers: None,
            timing: false,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.effects.is_empty() {
            vec![self.scenario.effect]
        } else {
            self.effects.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::config("at least one replicate is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        for &e in &self.grid() {
            ScenarioSpec {
                effect: e,
                ..self.scenario.clone()
            }
            .validate()?;
        }
        Ok(())
    }

    /// `(data seed, permutation seed)` of replicate `r`.
    pub fn replicate_seeds(&self, r: usize) -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r as u64);
        (rng.next_u64(), rng.next_u64())
    }

    fn plan(&self, perm_seed: u64) -> PermutationPlan {
        PermutationPlan::new(self.permutations, perm_seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    /// Single change: rejection rate and mean absolute error of the fraction.
    Power,
    /// Multiple changes: rate of finding exactly the true number of points,
    /// and mean absolute index error over those replicates.
    Segmentation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyRow {
    pub effect: f64,
    pub rate: f64,
    /// NaN when no replicate qualifies (segmentation only).
    pub mae: f64,
    pub replicates: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub family: Family,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn header(&self) -> &'static str {
        match self.kind {
            StudyKind::Power => "effect,power,mae,replicates,seconds",
            StudyKind::Segmentation => "effect,exact_count_rate,conditional_mae,replicates,seconds",
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header());
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.effect, r.rate, r.mae, r.replicates, r.seconds
            );
        }
        out
    }
}

fn over_grid<T: Send>(
    spec: &StudySpec,
    replicate: impl Fn(&ScenarioSpec, u64) -> Result<T> + Sync,
    summarise: impl Fn(f64, Vec<T>) -> StudyRow,
) -> Result<Vec<StudyRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for effect in spec.grid() {
        let started = Instant::now();
        let outcomes = parallel::install(spec.workers, || {
            (0..spec.replicates)
                .into_par_iter()
                .map(|r| {
                    let (data_seed, perm_seed) = spec.replicate_seeds(r);
                    let scenario = ScenarioSpec {
                        effect,
                        seed: data_seed,
                        ..spec.scenario.clone()
                    };
                    replicate(&scenario, perm_seed)
                })
                .collect::<Result<Vec<T>>>()
        })??;
        let mut row = summarise(effect, outcomes);
        row.seconds = if spec.timing {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Rejection rate at `alpha` and mean `|tau_hat - tau|` per grid point.
pub fn run_power_study(spec: &StudySpec) -> Result<StudyResult> {
    let tau = spec.scenario.taus()[0];
    let rows = over_grid(
        spec,
        |scenario, perm_seed| {
            let seq = generate(scenario)?;
            let d = build_distance_matrix(&seq.objects, seq.metric)?;
            let r = permutation_test(&d, spec.c, &spec.plan(perm_seed))?;
            let reject = r.rejects(spec.alpha).unwrap_or(false);
            Ok((reject, (r.tau_fraction - tau).abs()))
        },
        |effect, outcomes| {
            let m = outcomes.len() as f64;
            StudyRow {
                effect,
                rate: outcomes.iter().filter(|o| o.0).count() as f64 / m,
                mae: outcomes.iter().map(|o| o.1).sum::<f64>() / m,
                replicates: outcomes.len(),
                seconds: 0.0,
            }
        },
    )?;
    Ok(StudyResult {
        kind: StudyKind::Power,
        family: spec.scenario.family,
        rows,
    })
}

/// Seeded segmentation per replicate against the true boundaries.
pub fn run_segmentation_study(spec: &StudySpec) -> Result<StudyResult> {
    let rows = over_grid(
        spec,
        |scenario, perm_seed| {
            let seq = generate(scenario)?;
            let d = build_distance_matrix(&seq.objects, seq.metric)?;
            let config = SegmentationConfig {
                gamma: spec.gamma,
                min_len: spec.min_len,
                c: spec.c,
                q: spec.q,
                plan: spec.plan(perm_seed),
            };
            let found = mcpd_dp(&d, &config)?.indices();
            if found.len() != seq.boundaries.len() {
                return Ok(None);
            }
            let err = found
                .iter()
                .zip(&seq.boundaries)
                .map(|(&a, &b)| a.abs_diff(b) as f64)
                .sum::<f64>()
                / found.len().max(1) as f64;
            Ok(Some(err))
        },
        |effect, outcomes| {
            let exact: Vec<f64> = outcomes.iter().flatten().copied().collect();
            StudyRow {
                effect,
                rate: exact.len() as f64 / outcomes.len() as f64,
                mae: exact.iter().sum::<f64>() / exact.len() as f64,
                replicates: outcomes.len(),
                seconds: 0.0,
            }
        },
    )?;
    Ok(StudyResult {
        kind: StudyKind::Segmentation,
        family: spec.scenario.family,
        rows,
    })
}

/// Segmentation study for multi-change families, power study otherwise.
pub fn run_study(spec: &StudySpec) -> Result<StudyResult> {
    match spec.scenario.family {
        Family::SbmMulti => run_segmentation_study(spec),
        _ => run_power_study(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(effects: Vec<f64>, replicates: usize) -> StudySpec {
        let mut s = StudySpec::new(
            ScenarioSpec::new(Family::GaussMean, 40, 0.0, 0).with_dim(3),
            effects,
            replicates,
        );
        s.permutations = 39;
        s.seed = 5;
        s
    }

    #[test]
    fn table_shape_and_determinism() {
        let spec = small(vec![0.0, 2.0], 6);
        let a = run_power_study(&spec).unwrap();
        assert_eq!(a.rows.len(), 2);
        for r in &a.rows {
            assert!((0.0..=1.0).contains(&r.rate) && r.mae >= 0.0 && r.seconds == 0.0);
            assert_eq!(r.replicates, 6);
        }
        assert_eq!(a.rows[1].rate, 1.0);
        let b = run_power_study(&StudySpec {
            workers: Some(2),
            ..spec
        })
        .unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with("effect,power,mae,replicates,seconds\n"));
    }

    #[test]
    fn single_replicate_gives_binary_power() {
        let r = run_power_study(&small(vec![0.5], 1)).unwrap();
        assert!(r.rows[0].rate == 0.0 || r.rows[0].rate == 1.0);
    }

    #[test]
    fn study_spec_from_toml() {
        let s: StudySpec = toml::from_str(
            "effects = [0.0, 0.5]\nreplicates = 3\nseed = 9\n[scenario]\nfamily = \"gauss_scale\"\nn = 50\n",
        )
        .unwrap();
        assert_eq!(s.grid(), vec![0.0, 0.5]);
        assert_eq!(s.permutations, 199);
        // 0.5 is out of range for the scale family
        assert!(matches!(run_study(&s), Err(Error::Config(_))));
    }
}
