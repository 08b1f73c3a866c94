//! Experiment runner for hidden-dynamics analyses: presets, config files,
//! CSV/JSON/SVG output and annotation checks.

pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
pub use presets::PRESETS;
pub use report::{PresetOutput, RunReport};

/// Runs one preset; `cfg` is completed with every default the preset used.
pub fn run_experiment(name: &str, mut cfg: RunConfig) -> Result<(RunReport, PresetOutput)> {
    let start = Instant::now();
    cfg.experiment.preset = Some(name.to_string());
    let output = presets::run_preset(name, &mut cfg)?;
    let report = RunReport {
        preset: name.to_string(),
        config: cfg,
        outcomes: output.outcomes.clone(),
        annotations: output.annotations.clone(),
        pass: report::all_pass(&output.annotations),
        artifacts: vec![],
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((report, output))
}

/// Writes trajectories, figures and the report into `dir`.
pub fn write_artifacts(dir: &Path, report: &mut RunReport, output: &PresetOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut paths: Vec<PathBuf> = vec![];
    for t in &output.trajectories {
        paths.push(report::write_csv(dir, t)?);
    }
    for (name, plot) in &output.figures {
        paths.push(report::write_svg(dir, name, plot)?);
    }
    report.artifacts = paths
        .iter()
        .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    report.artifacts.push("report.json".into());
    report::write_report(dir, report)?;
    Ok(())
}
