//! Experiment runner binding the `lpball` modules into reproducible suites.
//!
//! A run reads an [`ExperimentConfig`], executes one suite and writes
//! `<suite>.json` (the report) and `<suite>.csv` (one line per row) into the
//! output directory. Rows are streamed to `<suite>.partial.jsonl` while the
//! suite runs; the file is removed once the report is written, so it only
//! survives an interrupted or failed run.

use std::fs::{self, File};
use std::path::PathBuf;
use std::time::Instant;

pub mod config;
pub mod error;
pub mod report;
mod suites;

pub use config::{ExperimentConfig, Suite};
pub use error::{CliError, CliResult};
pub use report::{emit_plot_data, ExperimentReport, Recorder, Row, Verdict};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LPBALL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "lpball-out";

/// `output` from the config, else `$LPBALL_OUTPUT_DIR`, else `lpball-out`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Paths of the report, the row CSV and the partial-results file.
pub fn output_paths(cfg: &ExperimentConfig) -> (PathBuf, PathBuf, PathBuf) {
    let dir = output_dir(cfg);
    let s = cfg.suite.name();
    (
        dir.join(format!("{s}.json")),
        dir.join(format!("{s}.csv")),
        dir.join(format!("{s}.partial.jsonl")),
    )
}

/// Runs a suite in memory, without touching the filesystem.
pub fn execute_suite(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    execute_with(cfg, Recorder::new(None))
}

fn execute_with(cfg: &ExperimentConfig, mut rec: Recorder) -> CliResult<ExperimentReport> {
    let start = Instant::now();
    let z = suites::execute(cfg, &mut rec)?;
    let (rows, notes) = rec.finish();
    let verdict = Verdict::from_pass(rows.iter().all(|r| r.verdict != Verdict::Fail));
    let mut report = ExperimentReport {
        schema: report::SCHEMA_VERSION,
        suite: cfg.suite.to_string(),
        config: cfg.echo(),
        library_version: format!("lpball {}", env!("CARGO_PKG_VERSION")),
        rng: report::RngProvenance {
            generator: "ChaCha8".into(),
            seed: cfg.seed,
            scheme: "stream = suite index; one child stream per grid cell".into(),
        },
        z: report::Num(z),
        rows,
        notes,
        verdict,
        wall_clock_seconds: 0.0,
        hash: String::new(),
    };
    report.hash = report.content_hash();
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs a suite and persists its report and row CSV.
pub fn run_suite(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let (json, csv, partial) = output_paths(cfg);
    fs::create_dir_all(output_dir(cfg))?;
    let report = execute_with(cfg, Recorder::new(Some(File::create(&partial)?)))?;
    fs::write(&json, report.to_json())?;
    report.write_rows_csv(File::create(&csv)?)?;
    fs::remove_file(&partial)?;
    Ok(report)
}
