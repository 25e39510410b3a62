use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kvn_cli::{parse_config, run_scenario, CliError};

/// Runs a KvN scenario described by a configuration file.
#[derive(Parser, Debug)]
#[command(name = "kvn", version)]
struct Args {
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    output: Option<String>,
    /// Oracle seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }
    if let Some(dir) = &args.output {
        config.override_output(dir);
    }
    let report = run_scenario(&config)?;
    if !args.quiet {
        println!("scenario {}: {}", config.scenario.name(), if report.passed() { "PASS" } else { "FAIL" });
        for c in report.checks.iter().filter(|c| !c.passed()) {
            println!("  failed: {} = {:e} (limit {:e})", c.name, c.value, c.limit);
        }
        if let Some(e) = &report.contraction_error {
            println!("  failed: {e}");
        }
        for f in &report.files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
