// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use std::collections::HashSet;

use common::*;
use distcp::metrics::{build_distance_matrix, validate_distance_matrix, MetricObject};
use distcp::permutation::{null_sample, permuted_statistic};
use distcp::segmentation::{mcpd_dp, seeded_intervals, segment_with_threshold, SegmentationConfig};
use distcp::{max_scan, permutation_test, scan_curve, DistanceMatrix, Metric, PermutationPlan};
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = DistanceMatrix> {
    (any::<u64>(), 10usize..40).prop_map(|(seed, n)| random_matrix(seed, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversal_mirrors_the_curve(d in matrix_strategy()) {
        let n = d.n();
        let fwd = scan_curve(&d, 0.1).unwrap();
        let rev = scan_curve(&d.reversed(), 0.1).unwrap();
        for (&k, &v) in fwd.splits().iter().zip(fwd.values()) {
            let j = rev.splits().iter().position(|&s| s == n - k).unwrap();
            prop_assert_eq!(rev.values()[j], v);
        }
    }

    #[test]
    fn dyadic_scaling_is_exact(d in matrix_strategy(), e in -6i32..6) {
        let f = 2f64.powi(e);
        let a = scan_curve(&d, 0.1).unwrap();
        let b = scan_curve(&d.scaled(f).unwrap(), 0.1).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert_eq!(x * f, *y);
        }
        prop_assert_eq!(a.argmax().0, b.argmax().0);
    }

    #[test]
    fn general_scaling_is_equivariant(d in matrix_strategy(), f in 0.01f64..100.0) {
        let (t, k) = max_scan(&d, 0.1).unwrap();
        let (ts, ks) = max_scan(&d.scaled(f).unwrap(), 0.1).unwrap();
        prop_assert!(close(ts, t * f, 1e-12));
        let curve = scan_curve(&d, 0.1).unwrap();
        // the argmax is stable unless the runner-up is within rounding of the max
        let runner_up = curve.values().iter().zip(curve.splits()).filter(|(_, &s)| s != k).map(|(v, _)| *v).fold(0.0, f64::max);
        if t - runner_up > 1e-9 * t {
            prop_assert_eq!(k, ks);
        }
    }

    #[test]
    fn statistics_are_finite_and_nonnegative(d in matrix_strategy()) {
        for v in scan_curve(&d, 0.1).unwrap().values() {
            prop_assert!(v.is_finite() && *v >= 0.0);
        }
    }

    #[test]
    fn p_value_lies_on_the_lattice(d in matrix_strategy(), k in 1usize..60, seed in any::<u64>()) {
        let r = permutation_test(&d, 0.1, &PermutationPlan::new(k, seed)).unwrap();
        let p = r.p_value.unwrap();
        let m = (p * (k + 1) as f64).round();
        prop_assert_eq!(p, m / (k + 1) as f64);
        prop_assert!(m >= 1.0 && m <= (k + 1) as f64);
        prop_assert_eq!(r.tau_index, r.scan.argmax().0);
    }

    #[test]
    fn implicit_permutation_matches_explicit(d in matrix_strategy(), seed in any::<u64>()) {
        let perm = PermutationPlan::new(1, seed).permutation(0, d.n());
        let implicit = permuted_statistic(&d, &perm, 0.1).unwrap();
        let explicit = max_scan(&d.permuted(&perm).unwrap(), 0.1).unwrap().0;
        prop_assert!(close(implicit, explicit, 1e-10), "{} vs {}", implicit, explicit);
    }

    #[test]
    fn seeded_interval_invariants(n in 4usize..400, gamma in 0.5f64..0.99, min_len in 2usize..20) {
        prop_assume!(n >= min_len);
        let s = seeded_intervals(n, gamma, min_len).unwrap();
        prop_assert_eq!(s.intervals[0], (0, n));
        let unique: HashSet<_> = s.intervals.iter().collect();
        prop_assert_eq!(unique.len(), s.intervals.len());
        for &(a, b) in &s.intervals {
            prop_assert!(a < b && b <= n && b - a >= min_len);
        }
        prop_assert_eq!(&s, &seeded_intervals(n, gamma, min_len).unwrap());
    }

    #[test]
    fn built_matrices_are_valid(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..20)) {
        let objs: Vec<MetricObject> = rows.into_iter().map(MetricObject::Vector).collect();
        let d = build_distance_matrix(&objs, Metric::Euclidean).unwrap();
        prop_assert!(validate_distance_matrix(&d).is_valid());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn segmentation_points_have_provenance(seed in any::<u64>(), shift in 0.0f64..6.0) {
        let mut r = rng(seed);
        let ys: Vec<f64> = normals(&mut r, 60).iter().enumerate()
            .map(|(i, z)| z + if (20..40).contains(&i) { shift } else { 0.0 })
            .collect();
        let d = line(&ys);
        let cfg = SegmentationConfig::new(PermutationPlan::new(29, seed));
        let set = mcpd_dp(&d, &cfg).unwrap();
        let idx = set.indices();
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        for p in &set.points {
            prop_assert!(0 < p.index && p.index < 60);
            prop_assert!(p.interval.0 < p.index && p.index < p.interval.1);
            prop_assert!(p.statistic >= set.threshold);
        }
    }

    #[test]
    fn higher_quantile_never_adds_points(seed in any::<u64>(), shift in 0.0f64..4.0) {
        let mut r = rng(seed);
        let ys: Vec<f64> = normals(&mut r, 50).iter().enumerate()
            .map(|(i, z)| z + if i >= 25 { shift } else { 0.0 })
            .collect();
        let d = line(&ys);
        let plan = PermutationPlan::new(39, seed);
        let null = null_sample(&d, 0.1, &plan).unwrap();
        let cfg = SegmentationConfig::new(plan);
        let mut last = usize::MAX;
        for q in [0.5, 0.7, 0.9, 0.975] {
            let count = segment_with_threshold(&d, &SegmentationConfig { q, ..cfg }, null.quantile(q).unwrap()).unwrap().len();
            prop_assert!(count <= last);
            last = count;
        }
    }
}
