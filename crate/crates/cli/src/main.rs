use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;
mod options;

use options::EstimatorArgs;

/// Constant-gain equation-error identification of cruise aerodynamics from flight-recorder data.
///
/// Exit codes: 0 success or converged, 2 input error, 3 flagged (did not converge), 4 numeric failure.
/// Set CGEEM_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "cgeem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a pseudo-recorder segment with known parameters.
    Simulate {
        /// Scenario file (JSON, or TOML by extension); defaults to the reference scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory for segment.csv, truth.json and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiply every noise level and rounding step.
        #[arg(long, default_value_t = 1.0)]
        noise_scale: f64,
    },
    /// Identify parameters from one or more segments (segment CSV or raw recorder CSV).
    Identify {
        /// Segment files; segments are processed in parallel.
        #[arg(required = true)]
        segments: Vec<PathBuf>,
        /// Aircraft constants (JSON or TOML); defaults to the segment's aircraft type.
        #[arg(long)]
        aircraft: Option<PathBuf>,
        /// Output directory for result_<flight_id>.json, trace_<flight_id>.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Run the constant-gain estimator and both least-squares baselines side by side.
    Compare {
        /// Segment file (segment CSV or raw recorder CSV).
        segment: PathBuf,
        /// Aircraft constants (JSON or TOML); defaults to the segment's aircraft type.
        #[arg(long)]
        aircraft: Option<PathBuf>,
        /// Output directory for comparison.csv, comparison.json and manifest.json.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Cut quasi-steady cruise segments out of a whole-flight recorder CSV.
    Extract {
        /// Whole-flight raw recorder CSV.
        flight: PathBuf,
        /// Cruise thresholds (JSON or TOML).
        #[arg(long)]
        criteria: Option<PathBuf>,
        /// Output directory for segment_<n>.csv (numbered from 1) and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Common grid rate in Hz (integer or 1/n); overrides the criteria file.
        #[arg(long)]
        grid_hz: Option<f64>,
    },
    /// Aggregate per-flight result files into fleet statistics.
    Fleet {
        /// Directory of per-flight result JSON files.
        results_dir: PathBuf,
        /// Output directory for fleet_summary.json, fleet_table.csv, histogram_<parameter>.csv, flagged.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("CGEEM_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Join the cause chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out,
            seed,
            noise_scale,
        } => commands::simulate(scenario.as_deref(), &out, seed, noise_scale),
        Command::Identify {
            segments,
            aircraft,
            out,
            estimator,
        } => commands::identify(&segments, aircraft.as_deref(), &out, &estimator),
        Command::Compare {
            segment,
            aircraft,
            out,
            estimator,
        } => commands::compare(&segment, aircraft.as_deref(), &out, &estimator),
        Command::Extract {
            flight,
            criteria,
            out,
            grid_hz,
        } => commands::extract(&flight, criteria.as_deref(), &out, grid_hz),
        Command::Fleet { results_dir, out } => commands::fleet(&results_dir, &out),
    };
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(commands::classify(&e).code())
        }
    }
}
