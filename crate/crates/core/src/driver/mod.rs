//! Scenario runs: configuration, solves, output files and the run manifest.

mod config;
mod runs;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{PartialConfig, RunConfig, Scenario};
pub use runs::{
    mean_speed, random_permeability, rate_thresholds, run_mms, run_random_perm, run_wellbore, solve,
    wellbore_setup, LevelSummary, RunOutcome, Solved, Status, MIN_RATE_LEVELS,
};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    status: Status,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_speed: Option<f64>,
    failures: &'a [String],
    files: Vec<String>,
    config: &'a RunConfig,
    levels: &'a [LevelSummary],
}

/// Writes `manifest.toml` into the output directory. The `[config]` table is
/// accepted by `--config` to repeat the run.
pub fn write_manifest(outcome: &RunOutcome) -> Result<PathBuf> {
    let out = &outcome.config.out;
    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        mean_speed: outcome.mean_speed,
        failures: &outcome.failures,
        files: outcome
            .files
            .iter()
            .map(|f| relative(f, out).display().to_string())
            .collect(),
        config: &outcome.config,
        levels: &outcome.levels,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    let path = out.join(MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn relative<'a>(path: &'a Path, base: &Path) -> &'a Path {
    path.strip_prefix(base).unwrap_or(path)
}

/// Runs the configured scenario, writes its files and the manifest.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut outcome = match config.scenario {
        Scenario::Mms => run_mms(config)?,
        Scenario::WellboreVertical | Scenario::WellboreHorizontal => run_wellbore(config)?,
        Scenario::RandomPerm => run_random_perm(config)?,
    };
    let manifest = write_manifest(&outcome)?;
    outcome.files.push(manifest);
    Ok(outcome)
}
