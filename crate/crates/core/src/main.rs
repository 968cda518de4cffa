use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pathghz::cli::{load_config, run_scenario, Scenario};

/// Path-encoded GHZ generation: scenario runner and CSV export.
#[derive(Parser, Debug)]
#[command(name = "pathghz", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum)]
    scenario: Scenario,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = load_config(&args.config).and_then(|cfg| run_scenario(&cfg, args.scenario, args.seed, &args.out));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    for c in &outcome.checks {
        let verdict = if c.passed { "ok" } else { "FAILED" };
        println!("check {:<40} {verdict:<6} value={:e} tol={:e}", c.name, c.value, c.tol);
    }
    let failed = outcome.failed_checks();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        eprintln!("error: invariant check failed: {}", names.join(", "));
        ExitCode::from(2)
    }
}
