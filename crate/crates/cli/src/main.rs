use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kvnlab::par::configure_threads;
use kvnlab_runner::{parse_config_with, run, Scenario, EXIT_FAIL, EXIT_USAGE};

/// Run one kvnlab scenario and record its outputs.
#[derive(Debug, Parser)]
#[command(name = "kvnlab", version)]
struct Cli {
    /// Scenario name, for example `classical-charge` or `qm-spectrum`.
    scenario: String,

    /// TOML config file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (default: `output_dir` from the config, then `kvnlab-out/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Replace a config value, e.g. `--override g=1.25`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn threads_from_env() -> Result<usize, String> {
    match std::env::var("KVNLAB_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| format!("KVNLAB_THREADS = `{v}` is not a non-negative integer")),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let usage = |msg: String| {
        eprintln!("error: {msg}");
        ExitCode::from(EXIT_USAGE as u8)
    };
    let scenario: Scenario = match cli.scenario.parse() {
        Ok(s) => s,
        Err(e) => return usage(e.to_string()),
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return usage(format!("cannot read {}: {e}", cli.config.display())),
    };
    let mut config = match parse_config_with(Some(scenario), &text, &cli.overrides) {
        Ok(c) => c,
        Err(e) => return usage(format!("{}: {e}", cli.config.display())),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let threads = match threads_from_env() {
        Ok(n) => n,
        Err(e) => return usage(e),
    };
    configure_threads(threads);

    let out = cli
        .out
        .or_else(|| config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("kvnlab-out").join(scenario.name()));
    let report = match run(&config, &out, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: writing to {}: {e}", out.display());
            return ExitCode::from(EXIT_FAIL as u8);
        }
    };
    for c in &report.manifest.checks {
        println!("{} {} = {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.condition);
    }
    if let Some(e) = &report.manifest.error {
        eprintln!("error: {e}");
    }
    println!("wrote {} files and manifest.json to {}", report.manifest.files.len(), out.display());
    ExitCode::from(report.exit_code() as u8)
}
