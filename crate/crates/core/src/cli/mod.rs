// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `distcp` command line.
//!
//! Exit status is 0 on success, 1 for data errors (unreadable or malformed
//! input, invalid matrices) and 2 for configuration and usage errors. A test
//! decision is reported as a field of the output, never as an exit status.

mod config;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{FileConfig, RunConfig};

use crate::error::{Error, Result};
use crate::io::{format_matrix, looks_like_distance_matrix, parse_rows, read_objects, read_text, write_text};
use crate::metrics::{build_distance_matrix_with_workers, validate_entries, DistanceMatrix, Metric};
use crate::permutation::permutation_test;
use crate::profile_scan::{scan_curve, DetectionResult};
use crate::segmentation::{mcpd_dp, SegmentationConfig};
use crate::simulate::{run_study, StudySpec};

#[derive(Debug, Parser)]
#[command(
    name = "distcp",
    version,
    about = "Change-point detection for sequences of objects in metric spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the pairwise distance matrix of an object sequence.
    Distances(CommonArgs),
    /// Test for a single change point by permutation.
    Detect(CommonArgs),
    /// Write the scan curve as CSV.
    Scan(CommonArgs),
    /// Find multiple change points by seeded binary segmentation.
    Segment(CommonArgs),
    /// Run a Monte Carlo power or segmentation study from a scenario file.
    Simulate(SimulateArgs),
    /// Check a distance matrix file and report violations.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Object sequence or distance matrix file (or a directory of matrix files).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// TOML file with default parameters; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// euclidean, composition, frobenius or cdf-l1.
    #[arg(long)]
    pub metric: Option<String>,
    /// Box of gridded CDF inputs.
    #[arg(
        long,
        value_name = "XMIN,XMAX,YMIN,YMAX",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub grid: Option<Vec<f64>>,
    /// Cutoff: splits are restricted to fractions in [c, 1 - c].
    #[arg(long)]
    pub c: Option<f64>,
    /// Number of random permutations.
    #[arg(long = "K", visible_alias = "permutations")]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "min-len")]
    pub min_len: Option<usize>,
    /// Quantile of the permutation null used as segmentation threshold.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write the permuted statistics, one per line (detect only).
    #[arg(long = "null-out", value_name = "FILE")]
    pub null_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML study description.
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "K", visible_alias = "permutations")]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Record wall-clock seconds per grid point (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Exit status for an error: 2 for configuration and usage, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Distances(a) => cmd_distances(&RunConfig::resolve(a)?, a),
        Command::Detect(a) => cmd_detect(&RunConfig::resolve(a)?, a),
        Command::Scan(a) => cmd_scan(&RunConfig::resolve(a)?, a),
        Command::Segment(a) => cmd_segment(&RunConfig::resolve(a)?, a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

/// The input as a distance matrix: built from objects when a metric is set,
/// read directly when the file is a square symmetric zero-diagonal matrix,
/// and otherwise treated as Euclidean vectors (Frobenius for a directory).
pub fn load_matrix(path: &Path, cfg: &RunConfig) -> Result<DistanceMatrix> {
    let metric = match cfg.metric {
        Some(m) => m,
        None if path.is_dir() => Metric::Frobenius,
        None => {
            let rows = parse_rows(&read_text(path)?, path)?;
            if looks_like_distance_matrix(&rows) {
                let values: Vec<Vec<f64>> = rows.into_iter().map(|r| r.values).collect();
                return DistanceMatrix::from_rows(&values, "file");
            }
            Metric::Euclidean
        }
    };
    let objects = read_objects(path, metric, cfg.grid)?;
    build_distance_matrix_with_workers(&objects, metric, cfg.workers)
}

fn cmd_distances(cfg: &RunConfig, a: &CommonArgs) -> Result<i32> {
    let metric = cfg
        .metric
        .ok_or_else(|| Error::config("distances requires --metric"))?;
    let objects = read_objects(&a.input, metric, cfg.grid)?;
    let d = build_distance_matrix_with_workers(&objects, metric, cfg.workers)?;
    emit(a.out.as_deref(), &format_matrix(&d))?;
    eprintln!("n = {}, metric = {}", d.n(), metric);
    Ok(0)
}

fn detect(cfg: &RunConfig, d: &DistanceMatrix) -> Result<DetectionResult> {
    let plan = cfg.plan();
    if let Some(w) = plan.level_warning(cfg.alpha) {
        eprintln!("warning: {w}");
    }
    permutation_test(d, cfg.c, &plan)
}

fn cmd_detect(cfg: &RunConfig, a: &CommonArgs) -> Result<i32> {
    let d = load_matrix(&a.input, cfg)?;
    let r = detect(cfg, &d)?;
    if let (Some(path), Some(null)) = (&a.null_out, &r.null) {
        write_text(path, &null.to_text())?;
    }
    emit(a.out.as_deref(), &r.to_record(Some(cfg.alpha)))?;
    Ok(0)
}

fn cmd_scan(cfg: &RunConfig, a: &CommonArgs) -> Result<i32> {
    let d = load_matrix(&a.input, cfg)?;
    let profile = scan_curve(&d, cfg.c)?;
    let (k, t) = profile.argmax();
    let mut text = profile.to_csv();
    text.push_str(&format!(
        "# argmax tau_index={k} tau_fraction={} statistic={t}\n",
        profile.fraction(k)
    ));
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_segment(cfg: &RunConfig, a: &CommonArgs) -> Result<i32> {
    let d = load_matrix(&a.input, cfg)?;
    let config = SegmentationConfig {
        gamma: cfg.gamma,
        min_len: cfg.min_len,
        c: cfg.c,
        q: cfg.q,
        plan: cfg.plan(),
    };
    let set = mcpd_dp(&d, &config)?;
    let mut text = format!(
        "# n = {}, threshold = {}, seed = {}\nindex,fraction,statistic,interval_start,interval_end\n",
        set.n, set.threshold, cfg.seed
    );
    text.push_str(&set.to_csv());
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let mut spec: StudySpec = toml::from_str(&read_text(&a.scenario)?)
        .map_err(|e| Error::config(format!("{}: {e}", a.scenario.display())))?;
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(k) = a.permutations {
        spec.permutations = k;
    }
    if a.workers.is_some() {
        spec.workers = a.workers;
    }
    spec.timing |= a.timing;
    let result = run_study(&spec)?;
    emit(a.out.as_deref(), &result.to_csv())?;
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let rows = parse_rows(&read_text(&a.input)?, &a.input)?;
    let values: Vec<Vec<f64>> = rows.into_iter().map(|r| r.values).collect();
    let report = validate_entries(&values);
    let mut text = format!("n = {}\nviolations = {}\n", report.n, report.violations.len());
    for v in &report.violations {
        text.push_str(&format!("violation: {v}\n"));
    }
    text.push_str(&format!(
        "warnings = {}\ntriangles_checked = {}\n",
        report.warnings.len(),
        report.triangles_checked
    ));
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    text.push_str(if report.is_valid() {
        "status = valid\n"
    } else {
        "status = invalid\n"
    });
    emit(a.out.as_deref(), &text)?;
    Ok(if report.is_valid() { 0 } else { 1 })
}
