//! `ordergap` command-line harness.
//!
//! Every verb prints a one-line JSON result on stdout. Failures print a JSON
//! error object on stderr and exit nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ordergap::harness::{analyze_spectrum, compare_policies, run_scenario, HarnessError, LoadedScenario, SystemKind};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "ordergap", version, about = "Order-gap termination and commutator spectral analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the order-gap loop and write trace.csv, report.json, summary.txt.
    Run {
        scenario: PathBuf,
        #[arg(long, env = "ORDERGAP_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Compare the order-gap stop with fixed budgets.
    Compare {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<usize>,
        #[arg(long, env = "ORDERGAP_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Fixed point, redundancy audit, Gramian verdicts and coverage table.
    Spectrum {
        scenario: PathBuf,
        #[arg(long, env = "ORDERGAP_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn execute(command: Command) -> Result<serde_json::Value, HarnessError> {
    match command {
        Command::Run { scenario, out } => {
            let r = run_scenario(&scenario, &out)?;
            Ok(json!({
                "name": r.name,
                "stop_step": r.stop_step(),
                "stop_reason": r.stop_reason(),
                "out": out.display().to_string(),
            }))
        }
        Command::Compare { scenario, budgets, out } => {
            let r = compare_policies(&scenario, &budgets, &out)?;
            let rows: Vec<_> = r
                .rows
                .iter()
                .map(|p| json!({ "policy": p.policy, "steps": p.steps, "distance": p.distance }))
                .collect();
            Ok(json!({ "name": r.name, "policies": rows, "out": out.display().to_string() }))
        }
        Command::Spectrum { scenario, out } => {
            let r = analyze_spectrum(&scenario, &out)?;
            let uncovered: Vec<_> = r.coverage.iter().filter(|c| !c.covered).map(|c| c.slot).collect();
            Ok(json!({
                "name": r.name,
                "status": r.status,
                "verdict": r.verdict,
                "uncovered_slots": uncovered,
                "out": out.display().to_string(),
            }))
        }
        Command::Validate { scenario } => {
            let s = LoadedScenario::load(&scenario)?;
            let system = match s.kind() {
                SystemKind::Scalar2d => "scalar2d",
                SystemKind::Graph => "graph",
            };
            Ok(json!({
                "valid": true,
                "name": s.name,
                "system": system,
                "dimension": s.theta0().len(),
                "distribution": s.has_distribution(),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
