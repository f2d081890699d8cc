// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use super::{draw_sequence, Family, ObjectSequence, ScenarioSpec};
use crate::error::{Error, Result};
use crate::metrics::MetricObject;

fn check_family(spec: &ScenarioSpec, family: Family) -> Result<()> {
    if spec.family != family {
        return Err(Error::config(format!(
            "{} generator called with a {} scenario",
            family.name(),
            spec.family.name()
        )));
    }
    Ok(())
}

fn normals(rng: &mut impl Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

/// `Sigma^{1/2} = H Lambda^{1/2}` for the mean-shift covariance
/// `Sigma = H Lambda H`, where `Lambda_kk = cos(k pi / p) + 1.5` and `H` is the
/// Householder reflection taking `e_1` to `p^{-1/2} 1`.
#[derive(Clone, Debug)]
pub struct MeanShiftFactor {
    sqrt_eigen: Vec<f64>,
    /// `e_1 - p^{-1/2} 1`, scaled so that `H = I - v v^T`.
    v: Vec<f64>,
}

impl MeanShiftFactor {
    pub fn new(p: usize) -> Self {
        let pf = p as f64;
        let eigen: Vec<f64> = (1..=p)
            .map(|k| (k as f64 * std::f64::consts::PI / pf).cos() + 1.5)
            .collect();
        let u = 1.0 / pf.sqrt();
        let mut v = vec![-u; p];
        v[0] += 1.0;
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 > 0.0 {
            let s = (2.0 / norm2).sqrt();
            v.iter_mut().for_each(|x| *x *= s);
        }
        Self {
            sqrt_eigen: eigen.iter().map(|l| l.sqrt()).collect(),
            v,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.sqrt_eigen.iter().map(|s| s * s).collect()
    }

    /// `H x`.
    pub fn reflect(&self, x: &mut [f64]) {
        let dot: f64 = self.v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(&self.v) {
            *xi -= vi * dot;
        }
    }

    /// `H Lambda^{1/2} z`.
    pub fn apply(&self, mut z: Vec<f64>) -> Vec<f64> {
        for (zi, s) in z.iter_mut().zip(&self.sqrt_eigen) {
            *zi *= s;
        }
        self.reflect(&mut z);
        z
    }

    /// Dense `Sigma`, row-major.
    pub fn covariance(&self) -> Vec<f64> {
        let p = self.sqrt_eigen.len();
        let mut cols = Vec::with_capacity(p);
        for j in 0..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            // column j of H Lambda^{1/2}
            cols.push(self.apply(e));
        }
        let mut sigma = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..p {
                sigma[a * p + b] = (0..p).map(|j| cols[j][a] * cols[j][b]).sum();
            }
        }
        sigma
    }
}

/// Mean `0` before the change and `effect * 1_p` after, common covariance.
pub fn gen_gaussian_mean_shift(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    check_family(spec, Family::GaussMean)?;
    let p = spec.dim();
    let factor = MeanShiftFactor::new(p);
    draw_sequence(spec, |segment, rng| {
        let shift = if segment == 0 { 0.0 } else { spec.effect };
        let mut x = factor.apply(normals(rng, p));
        x.iter_mut().for_each(|xi| *xi += shift);
        MetricObject::Vector(x)
    })
}

/// Covariance `0.8 I` before the change and `(0.8 - effect) I` after.
pub fn gen_gaussian_scale(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    check_family(spec, Family::GaussScale)?;
    let p = spec.dim();
    let sd = [0.8f64.sqrt(), (0.8 - spec.effect).sqrt()];
    draw_sequence(spec, |segment, rng| {
        let s = sd[segment.min(1)];
        MetricObject::Vector(normals(rng, p).into_iter().map(|z| s * z).collect())
    })
}

/// Standard normal before the change; after it, an equal mixture of
/// `N(-mu, I)` and `N(mu, I)` with `mu` equal to `effect` on the first
/// `floor(p / 10)` coordinates.
pub fn gen_gaussian_mixture(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    check_family(spec, Family::GaussMixture)?;
    let p = spec.dim();
    let affected = p / 10;
    draw_sequence(spec, |segment, rng| {
        let mut x = normals(rng, p);
        if segment > 0 {
            let m = if rng.random_bool(0.5) {
                -spec.effect
            } else {
                spec.effect
            };
            x[..affected].iter_mut().for_each(|xi| *xi += m);
        }
        MetricObject::Vector(x)
    })
}

/// Standard normal before the change, i.i.d. Student-t coordinates with
/// `effect` degrees of freedom after it. An effect of zero means no change.
pub fn gen_tail_change(spec: &ScenarioSpec) -> Result<ObjectSequence> {
    check_family(spec, Family::GaussTail)?;
    let p = spec.dim();
    let v = spec.effect;
    let t = if v > 0.0 {
        Some(StudentT::new(v).map_err(|e| Error::config(format!("degrees of freedom {v}: {e}")))?)
    } else {
        None
    };
    let scale = if spec.standardize_t && v > 2.0 {
        ((v - 2.0) / v).sqrt()
    } else {
        1.0
    };
    draw_sequence(spec, |segment, rng| match (&t, segment) {
        (Some(t), s) if s > 0 => MetricObject::Vector((0..p).map(|_| scale * t.sample(rng)).collect()),
        _ => MetricObject::Vector(normals(rng, p)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::generate;

    fn vectors(seq: &ObjectSequence) -> Vec<Vec<f64>> {
        seq.objects
            .iter()
            .map(|o| match o {
                MetricObject::Vector(v) => v.clone(),
                _ => panic!("expected vectors"),
            })
            .collect()
    }

    fn coordinate_moments(rows: &[Vec<f64>], j: usize) -> (f64, f64, f64) {
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let m2 = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let m4 = rows.iter().map(|r| (r[j] - mean).powi(4)).sum::<f64>() / n;
        (mean, m2, m4 / (m2 * m2))
    }

    #[test]
    fn covariance_has_prescribed_spectrum() {
        for p in [1, 2, 5, 30] {
            let f = MeanShiftFactor::new(p);
            let sigma = nalgebra::DMatrix::from_row_slice(p, p, &f.covariance());
            let mut got: Vec<f64> = sigma.symmetric_eigenvalues().iter().copied().collect();
            let mut want = f.eigenvalues();
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "p={p}: {g} vs {w}");
            }
            // first eigenvector is the normalised ones vector
            let ones = nalgebra::DVector::from_element(p, 1.0 / (p as f64).sqrt());
            let image = &sigma * &ones;
            let lambda1 = (std::f64::consts::PI / p as f64).cos() + 1.5;
            assert!((image - ones * lambda1).norm() < 1e-10);
        }
    }

    #[test]
    fn null_cases_do_not_depend_on_tau() {
        for family in [
            Family::GaussMean,
            Family::GaussScale,
            Family::GaussMixture,
            Family::GaussTail,
        ] {
            let a = ScenarioSpec::new(family, 40, 0.0, 9).with_dim(7);
            let b = a.clone().with_tau(vec![0.8]);
            assert_eq!(
                vectors(&generate(&a).unwrap()),
                vectors(&generate(&b).unwrap()),
                "{family:?}"
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = ScenarioSpec::new(Family::GaussMean, 30, 0.5, 4).with_dim(5);
        let a = vectors(&generate(&s).unwrap());
        assert_eq!(a, vectors(&generate(&s).unwrap()));
        let other = ScenarioSpec { seed: 5, ..s };
        assert_ne!(a, vectors(&generate(&other).unwrap()));
        assert_eq!(generate(&other).unwrap().boundaries, vec![10]);
    }

    #[test]
    fn null_mean_is_centred() {
        let s = ScenarioSpec::new(Family::GaussMean, 300, 0.0, 11).with_dim(30);
        let rows = vectors(&generate(&s).unwrap());
        let all: f64 = rows.iter().flatten().sum::<f64>() / 9000.0;
        assert!(all.abs() < 4.0 / 9000f64.sqrt(), "{all}");
    }

    #[test]
    fn mean_shift_moves_segment_two() {
        let s = ScenarioSpec::new(Family::GaussMean, 300, 1.0, 12).with_dim(30);
        let rows = vectors(&generate(&s).unwrap());
        let sigma = MeanShiftFactor::new(30).covariance();
        for j in 0..30 {
            let (mean, _, _) = coordinate_moments(&rows[100..], j);
            let tol = 4.0 * (sigma[j * 30 + j] / 200.0).sqrt();
            assert!((mean - 1.0).abs() < tol, "coordinate {j}: {mean}");
        }
    }

    #[test]
    fn scale_change_variance() {
        let s = ScenarioSpec::new(Family::GaussScale, 3000, 0.3, 13).with_dim(4);
        let rows = vectors(&generate(&s).unwrap());
        for j in 0..4 {
            let (_, var, _) = coordinate_moments(&rows[1000..], j);
            // sd of a sample variance is about var * sqrt(2 / m)
            assert!((var - 0.5).abs() < 5.0 * 0.5 * (2.0f64 / 2000.0).sqrt(), "{var}");
            let (_, var0, _) = coordinate_moments(&rows[..1000], j);
            assert!(
                (var0 - 0.8).abs() < 5.0 * 0.8 * (2.0f64 / 1000.0).sqrt(),
                "{var0}"
            );
        }
    }

    #[test]
    fn mixture_moments() {
        let s = ScenarioSpec::new(Family::GaussMixture, 6000, 1.0, 14).with_dim(20);
        let rows = vectors(&generate(&s).unwrap());
        let post = &rows[2000..];
        for j in 0..20 {
            let (mean, var, _) = coordinate_moments(post, j);
            assert!(mean.abs() < 5.0 * (2.0f64 / 4000.0).sqrt(), "mean {mean}");
            let want = if j < 2 { 2.0 } else { 1.0 };
            assert!(
                (var - want).abs() < 5.0 * want * (2.0f64 / 4000.0).sqrt(),
                "j={j} var {var}"
            );
        }
    }

    #[test]
    fn tail_moments() {
        let s = ScenarioSpec::new(Family::GaussTail, 30000, 1000.0, 15).with_dim(2);
        let rows = vectors(&generate(&s).unwrap());
        let (_, _, kurt) = coordinate_moments(&rows[10000..], 0);
        assert!((kurt - 3.0).abs() < 0.15, "{kurt}");

        let s = ScenarioSpec::new(Family::GaussTail, 60000, 5.0, 16).with_dim(1);
        let rows = vectors(&generate(&s).unwrap());
        let (_, var, _) = coordinate_moments(&rows[20000..], 0);
        assert!((var - 5.0 / 3.0).abs() < 0.1, "{var}");

        let s = ScenarioSpec {
            standardize_t: true,
            ..s
        };
        let rows = vectors(&generate(&s).unwrap());
        let (_, var, _) = coordinate_moments(&rows[20000..], 0);
        assert!((var - 1.0).abs() < 0.06, "{var}");
    }

    #[test]
    fn two_degrees_of_freedom_is_heavy() {
        let s = ScenarioSpec::new(Family::GaussTail, 30000, 2.0, 17).with_dim(1);
        let rows = vectors(&generate(&s).unwrap());
        let (_, small, _) = coordinate_moments(&rows[10000..11000], 0);
        let (_, large, _) = coordinate_moments(&rows[10000..], 0);
        assert!(large > 2.0, "{large}");
        assert!(small > 1.0, "{small}");
    }

    #[test]
    fn wrong_family_is_rejected() {
        let s = ScenarioSpec::new(Family::GaussScale, 30, 0.1, 1);
        assert!(matches!(gen_gaussian_mean_shift(&s), Err(Error::Config(_))));
    }
}
