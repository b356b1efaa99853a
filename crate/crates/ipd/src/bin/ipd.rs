//! Command-line entry point: run a scenario, sweep a parameter axis, or run
//! the property suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ipd::config::Config;
use ipd::output::write_atomic;
use ipd::run::{run_to_dir, sweep, sweep_csv, RunSummary, SweepAxis};
use ipd::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "ipd",
    version,
    about = "Immersed peridynamics: hyperelastic solids with failure in incompressible flow"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a scenario described by a JSON config file.
    Run {
        /// Path to the JSON config (needs "scenario" and "resolution").
        config: PathBuf,
        /// Override a config key, repeatable: --set nu_stab=0.49995
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory for series.csv, VTK snapshots, manifest.json.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Mark the run as a verification run in the manifest; outputs are
        /// bit-stable for identical configs either way.
        #[arg(long = "verify-mode")]
        verify_mode: bool,
        /// Suppress progress lines on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Run a scenario once per value of one axis and tabulate the results.
    Sweep {
        /// Path to the base JSON config.
        config: PathBuf,
        /// Axis to vary: N (resolution), epsilon (horizon factor), nu_stab.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. --values 8,16,32
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Directory receiving sweep.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every property suite and print measured residuals.
    Verify {
        /// Inject a deliberate fault into the named suite to prove the
        /// harness detects failures.
        #[arg(long, value_name = "SUITE")]
        inject_fault: Option<String>,
    },
}

fn thread_note() {
    if let Ok(v) = std::env::var("IPD_THREADS") {
        if v.trim() != "1" {
            eprintln!(
                "note: IPD_THREADS = {v} requested; this build executes single-threaded \
                 for exact reproducibility"
            );
        }
    }
}

fn read_config(path: &PathBuf, overrides: &[String]) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
    Config::parse_with_overrides(&text, overrides)
}

fn print_summary(s: &RunSummary) {
    let state = if s.reached_steady { "steady" } else { "final time" };
    println!(
        "{}: {} steps to t = {:.6} s ({state}) in {:.1} s",
        s.scenario, s.steps, s.final_time_s, s.wall_seconds
    );
    for (label, d) in &s.tracked {
        let comps: Vec<String> =
            d.iter().zip(["dx", "dy", "dz"]).map(|(v, c)| format!("{c} = {v:.6} cm")).collect();
        println!("  {label}: {}", comps.join(", "));
    }
    println!("  volume change: {:.6}%", s.volume_change_pct);
    if s.broken_pairs_total > 0 {
        println!("  broken bond pairs: {}", s.broken_pairs_total);
    }
    for w in &s.warnings {
        println!("  warning: {w}");
    }
    println!("  wrote {}", s.out_dir.display());
}

fn real_main(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Run { config, set, out, verify_mode, quiet } => {
            let params = read_config(&config, &set)?.resolve()?;
            let summary = run_to_dir(&params, &out, verify_mode, quiet)?;
            print_summary(&summary);
            Ok(true)
        }
        Cmd::Sweep { config, axis, values, out } => {
            let base = read_config(&config, &[])?;
            let axis = SweepAxis::parse(&axis)?;
            let rows = sweep(&base, axis, &values)?;
            let table = sweep_csv(axis, &rows);
            std::fs::create_dir_all(&out)
                .map_err(|e| SimError::Runtime(format!("cannot create {}: {e}", out.display())))?;
            write_atomic(&out.join("sweep.csv"), table.as_bytes())?;
            print!("{table}");
            let failures = rows.iter().filter(|r| r.status != "ok").count();
            if failures > 0 {
                eprintln!("{failures} of {} runs failed; see the status column", rows.len());
            }
            Ok(true)
        }
        Cmd::Verify { inject_fault } => {
            let report = ipd::verify::run_all(inject_fault.as_deref())?;
            print!("{}", report.render());
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    thread_note();
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
