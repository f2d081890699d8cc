// SPDX-License-Identifier: MIT OR Apache-2.0

//! Regenerates the committed CLI test fixtures:
//! `cargo run -p distcp --example fixtures -- crates/core/tests/fixtures`.

use std::path::PathBuf;

use distcp::io::{format_matrix, format_rows};
use distcp::metrics::build_distance_matrix;
use distcp::simulate::{generate, observation_rng, Family, ScenarioSpec};
use distcp::MetricObject;
use rand_distr::{Distribution, StandardNormal};

const SHIFT_SEED: u64 = 101;
const NULL_SEED: u64 = 202;
const THREE_SEED: u64 = 303;

fn scalars(seq: &[MetricObject]) -> Vec<Vec<f64>> {
    seq.iter()
        .map(|o| match o {
            MetricObject::Vector(v) => v.clone(),
            _ => unreachable!(),
        })
        .collect()
}

fn main() -> distcp::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "tests/fixtures".into()));
    std::fs::create_dir_all(&dir).expect("create fixture directory");

    let spec = ScenarioSpec::new(Family::GaussMean, 60, 2.0, SHIFT_SEED).with_dim(5);
    let seq = generate(&spec)?;
    let d = build_distance_matrix(&seq.objects, seq.metric)?;
    let text = format!(
        "# gauss_mean n=60 dim=5 effect=2 tau=1/3 seed={SHIFT_SEED}; euclidean distances\n{}",
        format_matrix(&d)
    );
    std::fs::write(dir.join("strong_shift.csv"), text).expect("write");

    let spec = ScenarioSpec::new(Family::GaussMean, 100, 0.0, NULL_SEED).with_dim(1);
    let rows = scalars(&generate(&spec)?.objects);
    let text = format!(
        "# gauss_mean n=100 dim=1 effect=0 seed={NULL_SEED}\n{}",
        format_rows(rows.iter().map(Vec::as_slice))
    );
    std::fs::write(dir.join("null_sequence.csv"), text).expect("write");

    let levels = [0.0, 5.0, 0.0, 5.0];
    let rows: Vec<Vec<f64>> = (0..160)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut observation_rng(THREE_SEED, i));
            vec![z + levels[i / 40]]
        })
        .collect();
    let text = format!(
        "# standard normal plus levels 0,5,0,5 changing at 40,80,120; seed={THREE_SEED}\n{}",
        format_rows(rows.iter().map(Vec::as_slice))
    );
    std::fs::write(dir.join("three_shifts.csv"), text).expect("write");
    Ok(())
}
