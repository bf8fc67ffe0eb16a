//! Configuration, dispatch and persistence for kvnlab scenario runs.

pub mod config;
pub mod output;
pub mod scenarios;

use std::io;
use std::path::Path;

use chrono::{SecondsFormat, Utc};

pub use config::{parse_config, parse_config_with, ConfigError, Scenario, ScenarioConfig};
pub use output::{Check, Outcome, RunManifest, Table};

/// Process exit status for a passing run.
pub const EXIT_PASS: i32 = 0;
/// A scenario check failed or a module returned an error.
pub const EXIT_FAIL: i32 = 1;
/// Bad command line or configuration.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
    /// `None` when the scenario returned an error.
    pub outcome: Option<Outcome>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Runs one scenario, writes its CSV tables into `out_dir` and finishes with
/// `manifest.json`. Module errors are recorded in the manifest rather than
/// returned; only I/O failures are.
pub fn run(config: &ScenarioConfig, out_dir: &Path, threads: usize) -> io::Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let started = now();
    let result = scenarios::dispatch(config);
    let (outcome, error) = match result {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let files = match &outcome {
        Some(o) => output::write_tables(out_dir, &o.tables)?,
        None => Vec::new(),
    };
    let checks = outcome.as_ref().map(|o| o.checks.clone()).unwrap_or_default();
    let metadata = outcome
        .as_ref()
        .map(|o| o.metadata.iter().cloned().collect())
        .unwrap_or_default();
    let manifest = RunManifest {
        scenario: config.scenario.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now(),
        seed: config.seed,
        units: serde_json::json!({ "hbar": 1.0, "mass": 1.0 }),
        threads,
        config: config.clone(),
        metadata,
        passed: error.is_none() && checks.iter().all(|c| c.passed),
        checks,
        files,
        error,
    };
    output::write_manifest(out_dir, &manifest)?;
    Ok(RunReport { manifest, outcome })
}
