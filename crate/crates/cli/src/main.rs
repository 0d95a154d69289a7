//! Command-line front end: run one scenario or a Monte Carlo sweep and
//! export deterministic result tables.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 when the SLNR
//! targets were infeasible in every drop.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use iatrx_core::export::{export, sweep_to_csv, Format};
use iatrx_core::sim::{run_scenario, Baseline, MetricsRecord};
use iatrx_core::sweep::{sweep, SweepAxis, SweepSpec};
use iatrx_core::NetworkConfig;

#[derive(Parser)]
#[command(
    name = "iatrx",
    about = "Link-level simulator for robust two-tier interference-alignment transceivers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and export per-instant records.
    Simulate {
        /// Scenario config file (flat key = value).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        /// none, nonrobust or oracle.
        #[arg(long, default_value = "none")]
        baseline: String,
    },
    /// Monte Carlo sweep over one scenario quantity.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// transmit_power_dbm, error_std or velocity_kmh.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid, e.g. 30,34,38,42,46.
        #[arg(long)]
        values: String,
        /// Monte Carlo drops per grid value.
        #[arg(long, default_value_t = 100)]
        drops: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn all_infeasible(records: &[MetricsRecord]) -> bool {
    records
        .iter()
        .flat_map(|r| r.cells.iter())
        .all(|c| !c.inner_feasible)
}

fn write_out(text: &str, out: &Option<PathBuf>) -> Result<(), std::io::Error> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<u8, (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            format,
            baseline,
        } => {
            let mut cfg = NetworkConfig::load(&config)
                .map_err(|e| (EXIT_VALIDATION, format!("config: {e}")))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let format: Format = format
                .parse()
                .map_err(|e| (EXIT_VALIDATION, format!("{e}")))?;
            let baseline: Baseline = baseline.parse().map_err(|e| (EXIT_VALIDATION, e))?;
            let records = run_scenario(&cfg, baseline);
            match out {
                Some(path) => export(&records, format, &path)
                    .map_err(|e| (EXIT_VALIDATION, format!("export: {e}")))?,
                None => {
                    let text = match format {
                        Format::Csv => iatrx_core::export::to_csv(&records),
                        Format::Json => iatrx_core::export::to_json(&records),
                    };
                    print!("{text}");
                }
            }
            if all_infeasible(&records) {
                return Ok(EXIT_INFEASIBLE);
            }
            Ok(0)
        }
        Command::Sweep {
            config,
            axis,
            values,
            drops,
            out,
        } => {
            let cfg = NetworkConfig::load(&config)
                .map_err(|e| (EXIT_VALIDATION, format!("config: {e}")))?;
            let axis: SweepAxis = axis.parse().map_err(|e| (EXIT_VALIDATION, e))?;
            let values: Vec<f64> = values
                .split(',')
                .filter(|v| !v.trim().is_empty())
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| (EXIT_VALIDATION, format!("bad value `{v}`: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err((EXIT_VALIDATION, "empty value list".to_string()));
            }
            if drops < 1 {
                return Err((EXIT_VALIDATION, "drops must be at least 1".to_string()));
            }
            let spec = SweepSpec {
                axis,
                values,
                drops,
                base: cfg,
                baseline: Baseline::None,
            };
            let rows = sweep(&spec);
            let text = sweep_to_csv(axis, &rows);
            write_out(&text, &out).map_err(|e| (EXIT_VALIDATION, format!("write: {e}")))?;
            let total_infeasible: usize = rows.iter().map(|r| r.infeasible_drops).sum();
            let total: usize = rows.iter().map(|r| r.drops).sum();
            if total > 0 && total_infeasible == total {
                return Ok(EXIT_INFEASIBLE);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
