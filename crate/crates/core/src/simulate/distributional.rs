// SPDX-License-Identifier: MIT OR Apache-2.0

use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{draw_sequence, Family, ObjectSequence, ScenarioSpec};
use crate::error::{Error, Result};
use crate::metrics::{GriddedCdf, MetricObject};

/// Standard deviation of each observed bivariate normal around its centre.
const SPREAD: f64 = 0.5;

/// Sequences of bivariate normal laws `N(Z_i, 0.25 I)`, each stored as its
/// CDF on the scenario grid.
///
/// Mean mode: `Z_i ~ N((effect, 0), 0.25 I)` after the change and
/// `N(0, 0.25 I)` before. Scale mode: `Z_i ~ N(0, diag((0.4 + effect)^2, 0.16))`
/// after and `N(0, 0.16 I)` before.
pub fn gen_bivariate_dist_seq(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    // (centre x mean, centre x sd, centre y sd) per segment
    let centre = match spec.family {
        Family::DistMean => [(0.0, 0.5, 0.5), (spec.effect, 0.5, 0.5)],
        Family::DistScale => [(0.0, 0.4, 0.4), (0.0, 0.4 + spec.effect, 0.4)],
        other => {
            return Err(Error::config(format!(
                "distributional generator called with a {} scenario",
                other.name()
            )))
        }
    };
    let grid = spec.grid.unwrap_or_default();
    let phi = Normal::standard();
    draw_sequence(spec, |segment, rng| {
        let (mx, sx, sy) = centre[segment.min(1)];
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let (cx, cy) = (mx + sx * z1, sy * z2);
        let fx: Vec<f64> = (0..grid.nx)
            .map(|i| phi.cdf((grid.x_node(i) - cx) / SPREAD))
            .collect();
        let fy: Vec<f64> = (0..grid.ny)
            .map(|j| phi.cdf((grid.y_node(j) - cy) / SPREAD))
            .collect();
        let values = fx.iter().flat_map(|a| fy.iter().map(move |b| a * b)).collect();
        let cdf = GriddedCdf::new(grid, values).expect("product of normal CDFs is a valid CDF");
        MetricObject::GriddedCdf(cdf)
    })
}
