// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point detection for sequences of objects in metric spaces, built on
//! distance profiles.
//!
//! The pipeline is: objects -> [`metrics::DistanceMatrix`] -> scan curve
//! ([`profile_scan`]) -> permutation calibration ([`permutation`]). Multiple
//! change points are found by seeded binary segmentation ([`segmentation`]).
//! [`simulate`] holds scenario generators and a Monte Carlo study driver, and
//! [`cli`] the command-line front end.

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod parallel;
pub mod permutation;
pub mod profile_scan;
pub mod segmentation;
pub mod simulate;

pub use error::{Error, Result};
pub use metrics::{DistanceMatrix, Metric, MetricObject};
pub use permutation::{permutation_test, PermutationPlan};
pub use profile_scan::{max_scan, scan_curve, DetectionResult, ScanProfile};
