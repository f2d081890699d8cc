// SPDX-License-Identifier: MIT OR Apache-2.0

//! Scenario generators and the Monte Carlo study driver.
//!
//! Observation `i` of a sequence is drawn from its own ChaCha8 stream keyed by
//! `(seed, i)`, and both segments of a two-sample scenario share one code
//! path with the effect entering as a parameter. A zero effect therefore
//! produces the same sequence whatever the change fraction, which is how the
//! null cases are tested.

mod distributional;
mod gaussian;
mod network;
mod study;

pub use distributional::gen_bivariate_dist_seq;
pub use gaussian::{
    gen_gaussian_mean_shift, gen_gaussian_mixture, gen_gaussian_scale, gen_tail_change, MeanShiftFactor,
};
pub use network::{gen_pa_networks, gen_sbm_sequence, grow_pa_graph, laplacian, sample_sbm, Graph};
pub use study::{
    run_power_study, run_segmentation_study, run_study, StudyKind, StudyResult, StudyRow, StudySpec,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricObject};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GaussMean,
    GaussScale,
    GaussMixture,
    GaussTail,
    DistMean,
    DistScale,
    PaNetwork,
    SbmMulti,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::GaussMean => "gauss_mean",
            Family::GaussScale => "gauss_scale",
            Family::GaussMixture => "gauss_mixture",
            Family::GaussTail => "gauss_tail",
            Family::DistMean => "dist_mean",
            Family::DistScale => "dist_scale",
            Family::PaNetwork => "pa_network",
            Family::SbmMulti => "sbm_multi",
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            Family::GaussMean | Family::GaussScale | Family::GaussMixture | Family::GaussTail => {
                Metric::Euclidean
            }
            Family::DistMean | Family::DistScale => Metric::CdfL1,
            Family::PaNetwork | Family::SbmMulti => Metric::Frobenius,
        }
    }

    fn default_dim(self) -> usize {
        match self {
            Family::GaussTail => 5,
            Family::GaussMean | Family::GaussScale | Family::GaussMixture => 30,
            Family::DistMean | Family::DistScale => 0,
            Family::PaNetwork => 200,
            Family::SbmMulti => 300,
        }
    }

    fn default_tau(self) -> Vec<f64> {
        match self {
            Family::SbmMulti => vec![0.25, 0.5, 0.75],
            _ => vec![1.0 / 3.0],
        }
    }
}

/// One stochastic block model regime: block probabilities and community sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmStage {
    pub block_probs: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
}

impl SbmStage {
    pub fn validate(&self, nodes: usize) -> Result<()> {
        let k = self.sizes.len();
        if k == 0 || self.block_probs.len() != k || self.block_probs.iter().any(|r| r.len() != k) {
            return Err(Error::config(format!(
                "block probability matrix must be {k}x{k} to match {k} communities"
            )));
        }
        for a in 0..k {
            for b in 0..k {
                let p = self.block_probs[a][b];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config(format!("block probability {p} outside [0, 1]")));
                }
                if p != self.block_probs[b][a] {
                    return Err(Error::config("block probability matrix is not symmetric"));
                }
            }
        }
        let total: usize = self.sizes.iter().sum();
        if total != nodes {
            return Err(Error::config(format!(
                "community sizes sum to {total}, expected {nodes} nodes"
            )));
        }
        Ok(())
    }

    /// The four regimes of the three-change network experiment.
    pub fn reference_stages() -> Vec<SbmStage> {
        let three = |d: [f64; 3]| {
            (0..3)
                .map(|a| (0..3).map(|b| if a == b { d[a] } else { 0.001 }).collect())
                .collect()
        };
        vec![
            SbmStage {
                block_probs: three([0.2, 0.2, 0.2]),
                sizes: vec![100, 100, 100],
            },
            SbmStage {
                block_probs: three([0.8, 0.2, 0.8]),
                sizes: vec![100, 100, 100],
            },
            SbmStage {
                block_probs: three([0.8, 0.2, 0.8]),
                sizes: vec![200, 50, 50],
            },
            SbmStage {
                block_probs: vec![vec![0.5, 0.01], vec![0.01, 0.5]],
                sizes: vec![200, 100],
            },
        ]
    }
}

/// Growth parameters of the preferential attachment model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Attachment {
    /// Edges added with each new node.
    pub edges: usize,
    /// Added to each degree before raising to the attachment exponent.
    pub offset: f64,
}

impl Default for Attachment {
    fn default() -> Self {
        Self {
            edges: 2,
            offset: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Fractions {
    One(f64),
    Many(Vec<f64>),
}

fn fractions<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Ok(match Fractions::deserialize(d)? {
        Fractions::One(t) => vec![t],
        Fractions::Many(ts) => ts,
    })
}

/// Full description of one generated sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub family: Family,
    #[serde(default = "default_length")]
    pub n: usize,
    /// Change fractions; empty selects the family default.
    #[serde(default, deserialize_with = "fractions")]
    pub tau: Vec<f64>,
    /// Family-specific magnitude; zero is the no-change case for every family.
    #[serde(default)]
    pub effect: f64,
    /// Vector dimension or node count; `None` selects the family default.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub grid: Option<crate::metrics::GridSpec>,
    /// Block model regimes, one more than change fractions.
    #[serde(default)]
    pub stages: Vec<SbmStage>,
    #[serde(default)]
    pub attachment: Attachment,
    /// Rescale Student-t coordinates to unit variance.
    #[serde(default)]
    pub standardize_t: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_length() -> usize {
    150
}

impl ScenarioSpec {
    pub fn new(family: Family, n: usize, effect: f64, seed: u64) -> Self {
        Self {
            family,
            n,
            tau: Vec::new(),
            effect,
            dim: None,
            grid: None,
            stages: Vec::new(),
            attachment: Attachment::default(),
            standardize_t: false,
            seed,
        }
    }

    pub fn with_tau(mut self, tau: Vec<f64>) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or_else(|| self.family.default_dim())
    }

    pub fn taus(&self) -> Vec<f64> {
        if self.tau.is_empty() {
            self.family.default_tau()
        } else {
            self.tau.clone()
        }
    }

    pub fn sbm_stages(&self) -> Vec<SbmStage> {
        if self.stages.is_empty() {
            SbmStage::reference_stages()
        } else {
            self.stages.clone()
        }
    }

    /// Segment boundaries `floor(n tau)`, strictly increasing inside `(0, n)`.
    pub fn boundaries(&self) -> Result<Vec<usize>> {
        let taus = self.taus();
        if self.family != Family::SbmMulti && taus.len() != 1 {
            return Err(Error::config(format!(
                "{} takes a single change fraction, got {}",
                self.family.name(),
                taus.len()
            )));
        }
        let mut out = Vec::with_capacity(taus.len());
        for &t in &taus {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config(format!("change fraction {t} outside (0, 1)")));
            }
            let b = (self.n as f64 * t).floor() as usize;
            if b == 0 || out.last().is_some_and(|&prev| b <= prev) {
                return Err(Error::config(format!(
                    "change fractions {taus:?} do not give increasing boundaries inside (0, {})",
                    self.n
                )));
            }
            out.push(b);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::config(format!("sequence length {} is below 4", self.n)));
        }
        self.boundaries()?;
        let e = self.effect;
        let in_range = |lo: f64, hi: f64| e.is_finite() && e >= lo && e <= hi;
        let ok = match self.family {
            Family::GaussMean => e.is_finite(),
            Family::GaussScale => e.is_finite() && (0.0..0.4).contains(&e),
            Family::GaussMixture | Family::DistMean => in_range(0.0, 1.0),
            Family::DistScale => in_range(0.0, 0.4),
            Family::GaussTail => e == 0.0 || e >= 2.0,
            Family::PaNetwork => in_range(0.0, 0.5),
            Family::SbmMulti => true,
        };
        if !ok {
            return Err(Error::config(format!(
                "effect {e} outside the admissible range for {}",
                self.family.name()
            )));
        }
        match self.family {
            Family::DistMean | Family::DistScale => self.grid.unwrap_or_default().validate()?,
            Family::SbmMulti => {
                let stages = self.sbm_stages();
                if stages.len() != self.taus().len() + 1 {
                    return Err(Error::config(format!(
                        "{} block model stages for {} change fractions",
                        stages.len(),
                        self.taus().len()
                    )));
                }
                for s in &stages {
                    s.validate(self.dim())?;
                }
            }
            Family::PaNetwork => {
                if self.attachment.edges < 1 || self.dim() < 3 + self.attachment.edges {
                    return Err(Error::config(
                        "attachment needs edges >= 1 and nodes >= edges + 3",
                    ));
                }
                if self.attachment.offset.is_nan() || self.attachment.offset <= 0.0 {
                    return Err(Error::config("attachment offset must be positive"));
                }
            }
            _ => {
                if self.dim() < 1 {
                    return Err(Error::config("dimension must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

/// A generated sequence with its true segment boundaries.
#[derive(Clone, Debug)]
pub struct ObjectSequence {
    pub objects: Vec<MetricObject>,
    pub boundaries: Vec<usize>,
    pub metric: Metric,
}

impl ObjectSequence {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

/// Stream for observation `i` of a sequence generated with `seed`.
pub fn observation_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

pub(crate) fn segment_of(boundaries: &[usize], i: usize) -> usize {
    boundaries.partition_point(|&b| b <= i)
}

/// Generates the sequence described by `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    match spec.family {
        Family::GaussMean => gen_gaussian_mean_shift(spec),
        Family::GaussScale => gen_gaussian_scale(spec),
        Family::GaussMixture => gen_gaussian_mixture(spec),
        Family::GaussTail => gen_tail_change(spec),
        Family::DistMean | Family::DistScale => gen_bivariate_dist_seq(spec),
        Family::PaNetwork => gen_pa_networks(spec),
        Family::SbmMulti => gen_sbm_sequence(spec),
    }
}

/// Draws every observation from its own stream; `draw(segment, rng)`.
pub(crate) fn draw_sequence(
    spec: &ScenarioSpec,
    draw: impl Fn(usize, &mut ChaCha8Rng) -> MetricObject + Sync,
) -> Result<ObjectSequence> {
    use rayon::prelude::*;
    spec.validate()?;
    let boundaries = spec.boundaries()?;
    let objects = (0..spec.n)
        .into_par_iter()
        .map(|i| draw(segment_of(&boundaries, i), &mut observation_rng(spec.seed, i)))
        .collect();
    Ok(ObjectSequence {
        objects,
        boundaries,
        metric: spec.family.metric(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries_are_floors() {
        let s = ScenarioSpec::new(Family::GaussMean, 100, 0.0, 1);
        assert_eq!(s.boundaries().unwrap(), vec![33]);
        let s = ScenarioSpec::new(Family::SbmMulti, 200, 0.0, 1);
        assert_eq!(s.boundaries().unwrap(), vec![50, 100, 150]);
        assert_eq!(segment_of(&[50, 100, 150], 49), 0);
        assert_eq!(segment_of(&[50, 100, 150], 50), 1);
        assert_eq!(segment_of(&[50, 100, 150], 199), 3);
    }

    #[test]
    fn spec_errors() {
        let bad = |s: ScenarioSpec| assert!(matches!(s.validate(), Err(Error::Config(_))), "{s:?}");
        bad(ScenarioSpec::new(Family::GaussScale, 50, 0.4, 1));
        bad(ScenarioSpec::new(Family::GaussMixture, 50, 1.5, 1));
        bad(ScenarioSpec::new(Family::GaussTail, 50, 1.0, 1));
        bad(ScenarioSpec::new(Family::PaNetwork, 50, 0.6, 1));
        bad(ScenarioSpec::new(Family::GaussMean, 50, 0.5, 1).with_tau(vec![1.2]));
        bad(ScenarioSpec::new(Family::GaussMean, 50, 0.5, 1).with_tau(vec![0.3, 0.6]));
        bad(ScenarioSpec::new(Family::SbmMulti, 50, 0.0, 1).with_tau(vec![0.5]));
        let mut s = ScenarioSpec::new(Family::SbmMulti, 50, 0.0, 1);
        s.stages = SbmStage::reference_stages();
        s.stages[1].block_probs[0][1] = 0.5;
        bad(s);
        bad(ScenarioSpec::new(Family::SbmMulti, 50, 0.0, 1).with_dim(299));
    }

    #[test]
    fn scenario_from_toml() {
        let s: ScenarioSpec =
            toml::from_str("family = \"gauss_mean\"\nn = 90\ntau = 0.5\neffect = 1.0\ndim = 4\nseed = 3\n")
                .unwrap();
        assert_eq!(s.taus(), vec![0.5]);
        assert_eq!(s.dim(), 4);
        let s: ScenarioSpec = toml::from_str(
            "family = \"sbm_multi\"\ntau = [0.5]\ndim = 4\n[[stages]]\nblock_probs = [[0.5]]\nsizes = [4]\n[[stages]]\nblock_probs = [[0.1]]\nsizes = [4]\n",
        )
        .unwrap();
        s.validate().unwrap();
        assert!(toml::from_str::<ScenarioSpec>("family = \"nope\"").is_err());
        assert!(toml::from_str::<ScenarioSpec>("family = \"gauss_mean\"\nbogus = 1").is_err());
    }
}
