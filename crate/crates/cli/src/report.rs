use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::Result;
use crate::svg::PhasePlot;

/// An expected-outcome check attached to a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub name: String,
    pub expected: String,
    pub actual: String,
    /// `None` when an override moved the run away from the annotated parameters.
    pub pass: Option<bool>,
}

impl Annotation {
    pub fn check(name: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, pass: bool) -> Self {
        Annotation { name: name.into(), expected: expected.into(), actual: actual.into(), pass: Some(pass) }
    }

    pub fn skipped(name: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Annotation { name: name.into(), expected: expected.into(), actual: actual.into(), pass: None }
    }

    /// A check that only applies when `applies` holds.
    pub fn when(applies: bool, name: &str, expected: impl Into<String>, actual: impl Into<String>, pass: bool) -> Self {
        if applies {
            Self::check(name, expected, actual, pass)
        } else {
            Self::skipped(name, expected, actual)
        }
    }
}

/// One computed result, e.g. a classification at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: String,
    pub tag: String,
    pub details: Value,
}

impl Outcome {
    pub fn new(label: impl Into<String>, tag: impl Into<String>, details: Value) -> Self {
        Outcome { label: label.into(), tag: tag.into(), details }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    /// From sample times and states; the state columns are named by `names`.
    pub fn new(name: impl Into<String>, names: &[&str], times: &[f64], states: &[Vec<f64>]) -> Self {
        let mut columns = vec!["t".to_string()];
        columns.extend(names.iter().map(|s| s.to_string()));
        let rows = times
            .iter()
            .zip(states)
            .map(|(t, s)| std::iter::once(*t).chain(s.iter().copied()).collect())
            .collect();
        TrajectoryTable { name: name.into(), columns, rows }
    }

    pub fn xy(&self, i: usize, j: usize) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r[i], r[j])).collect()
    }
}

#[derive(Default)]
pub struct PresetOutput {
    pub outcomes: Vec<Outcome>,
    pub annotations: Vec<Annotation>,
    pub trajectories: Vec<TrajectoryTable>,
    pub figures: Vec<(String, PhasePlot)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub preset: String,
    pub config: RunConfig,
    pub outcomes: Vec<Outcome>,
    pub annotations: Vec<Annotation>,
    pub pass: bool,
    pub artifacts: Vec<String>,
    /// Wall-clock time; the only field that differs between identical runs.
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn failed_annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(|a| a.pass == Some(false))
    }
}

pub fn all_pass(annotations: &[Annotation]) -> bool {
    annotations.iter().all(|a| a.pass != Some(false))
}

pub fn write_csv(dir: &Path, t: &TrajectoryTable) -> Result<PathBuf> {
    let path = dir.join(format!("traj_{}.csv", t.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r.iter().map(|x| format!("{x:.12e}")))?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_svg(dir: &Path, name: &str, plot: &PhasePlot) -> Result<PathBuf> {
    let path = dir.join(format!("fig_{name}.svg"));
    std::fs::write(&path, plot.render()?)?;
    Ok(path)
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<PathBuf> {
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| crate::error::CliError::Numerical(e.to_string()))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}
