use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpball::sampling::write_samples_csv;
use lpball::{BallMeasure, MeasureKind, PExponent, RngState};
use lpball_cli::report::diff_reports;
use lpball_cli::{
    emit_plot_data, output_paths, run_suite, CliError, CliResult, ExperimentConfig, ExperimentReport, Verdict,
};

#[derive(Parser)]
#[command(name = "lpball", version, about = "Verification suites for measures on l_p^n balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config and the environment.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print (x, value, lower, upper) CSV for one quantity of a report.
    Plot {
        report: PathBuf,
        quantity: String,
        /// Keep only rows with this label.
        #[arg(long)]
        label: Option<String>,
    },
    /// Draw points from a measure, e.g. `volume/5/1.5` or `gamma-mixed:0.5/5/2`.
    Sample {
        measure: String,
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List the differences between two reports.
    ReportDiff { a: PathBuf, b: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lpball: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<bool> {
    match cmd {
        Command::Run { config, output } => {
            let mut cfg = ExperimentConfig::parse(&std::fs::read_to_string(&config)?)?;
            if output.is_some() {
                cfg.output = output;
            }
            let report = run_suite(&cfg)?;
            let (json, csv, _) = output_paths(&cfg);
            let failures = report.failures().count();
            println!(
                "{}: {} ({} rows, {} failed, {:.1} s)",
                report.suite,
                report.verdict.as_str(),
                report.rows.len(),
                failures,
                report.wall_clock_seconds
            );
            for r in report.failures().take(20) {
                println!("  fail {} [{}] x={} estimate={}", r.quantity, r.label, r.x, r.estimate);
            }
            println!(
                "report {}\nrows   {}\nhash   {}",
                json.display(),
                csv.display(),
                report.hash
            );
            Ok(report.verdict == Verdict::Pass)
        }
        Command::Plot {
            report,
            quantity,
            label,
        } => {
            let mut r = ExperimentReport::read(&report)?;
            if let Some(l) = label {
                if r.rows.iter().any(|x| x.quantity == quantity) {
                    r.rows.retain(|x| x.quantity != quantity || x.label == l);
                }
            }
            emit_plot_data(&r, &quantity, io::stdout().lock())?;
            Ok(true)
        }
        Command::Sample { measure, count, seed } => {
            let m = parse_measure(&measure)?;
            let data = m.sample_matrix(count, &mut RngState::new(seed, 0).rng());
            let mut out = io::stdout().lock();
            write_samples_csv(&mut out, &data, m.n())?;
            out.flush()?;
            Ok(true)
        }
        Command::ReportDiff { a, b } => {
            let diffs = diff_reports(&ExperimentReport::read(&a)?, &ExperimentReport::read(&b)?);
            for d in &diffs {
                println!("{d}");
            }
            if diffs.is_empty() {
                println!("identical");
            }
            Ok(diffs.is_empty())
        }
    }
}

/// `<kind>/<n>/<p>`.
fn parse_measure(spec: &str) -> CliResult<BallMeasure> {
    let bad = || CliError::Config(format!("measure spec '{spec}' is not <kind>/<n>/<p>"));
    let parts: Vec<&str> = spec.split('/').collect();
    let [kind, n, p] = parts.as_slice() else {
        return Err(bad());
    };
    let kind: MeasureKind = kind.parse()?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let p: f64 = p.trim().parse().map_err(|_| bad())?;
    Ok(BallMeasure::new(n, PExponent::new(p)?, kind)?)
}
