// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use serde::Deserialize;

use super::CommonArgs;
use crate::error::{Error, Result};
use crate::io::read_text;
use crate::metrics::Metric;
use crate::permutation::{PermutationPlan, DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};
use crate::segmentation::{DEFAULT_GAMMA, DEFAULT_MIN_LEN, DEFAULT_QUANTILE};

/// Optional parameters from a `--config` TOML file.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub metric: Option<Metric>,
    pub c: Option<f64>,
    pub permutations: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub min_len: Option<usize>,
    pub q: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub grid: Option<[f64; 4]>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        toml::from_str(&read_text(path)?).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }
}

/// Parameters after merging flags over the config file over defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub metric: Option<Metric>,
    pub c: f64,
    pub permutations: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub min_len: usize,
    pub q: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub grid: Option<[f64; 4]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metric: None,
            c: 0.1,
            permutations: DEFAULT_PERMUTATIONS,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            min_len: DEFAULT_MIN_LEN,
            q: DEFAULT_QUANTILE,
            seed: 0,
            workers: None,
            grid: None,
        }
    }
}

impl RunConfig {
    pub fn resolve(a: &CommonArgs) -> Result<Self> {
        let file = match &a.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let d = Self::default();
        let metric = match &a.metric {
            Some(m) => Some(m.parse::<Metric>()?),
            None => file.metric,
        };
        let grid = match &a.grid {
            Some(g) => Some(
                <[f64; 4]>::try_from(g.as_slice())
                    .map_err(|_| Error::config("--grid takes four values: xmin,xmax,ymin,ymax"))?,
            ),
            None => file.grid,
        };
        let cfg = Self {
            metric,
            c: a.c.or(file.c).unwrap_or(d.c),
            permutations: a.permutations.or(file.permutations).unwrap_or(d.permutations),
            alpha: a.alpha.or(file.alpha).unwrap_or(d.alpha),
            gamma: a.gamma.or(file.gamma).unwrap_or(d.gamma),
            min_len: a.min_len.or(file.min_len).unwrap_or(d.min_len),
            q: a.q.or(file.q).unwrap_or(d.q),
            seed: a.seed.or(file.seed).unwrap_or(d.seed),
            workers: a.workers.or(file.workers),
            grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::config(msg));
        if !(self.c > 0.0 && self.c < 0.5) {
            return fail(format!("c must lie in (0, 0.5), got {}", self.c));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.permutations < 1 {
            return fail("K must be at least 1".into());
        }
        if !(0.5..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0.5, 1), got {}", self.gamma));
        }
        if self.min_len < 4 {
            return fail(format!("min-len must be at least 4, got {}", self.min_len));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return fail(format!("q must lie in (0, 1), got {}", self.q));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn plan(&self) -> PermutationPlan {
        PermutationPlan {
            permutations: self.permutations,
            seed: self.seed,
            workers: self.workers,
        }
    }
}
