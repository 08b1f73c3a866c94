//! Run configuration: one JSON document with `system`, `switching`, `integrator`
//! and `experiment` sections. Every preset fills in the values it uses, and the
//! resolved document is echoed into the report so it can be fed back with `--config`.

use std::path::Path;

use hidden_dynamics::integrate::{ClassifyConfig, IntegratorConfig};
use hidden_dynamics::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub switching: SwitchingSection,
    pub integrator: IntegratorSection,
    pub experiment: ExperimentSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub horizon: f64,
    pub event_tol: f64,
    pub eq_tol: f64,
    pub eq_window: f64,
    pub cycle_tol: f64,
    pub period_tol: f64,
    pub cycle_confirmations: usize,
    pub exit_tol: f64,
    pub entry_offset: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = ClassifyConfig::<f64>::default();
        IntegratorSection {
            rtol: c.integrator.rtol,
            atol: c.integrator.atol,
            max_step: c.integrator.max_step,
            horizon: c.integrator.horizon,
            event_tol: c.integrator.event_tol,
            eq_tol: c.eq_tol,
            eq_window: c.eq_window,
            cycle_tol: c.cycle_tol,
            period_tol: c.period_tol,
            cycle_confirmations: c.cycle_confirmations,
            exit_tol: c.exit_tol,
            entry_offset: c.entry_offset,
        }
    }
}

impl IntegratorSection {
    pub fn integrator(&self) -> IntegratorConfig<f64> {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step,
            horizon: self.horizon,
            event_tol: self.event_tol,
            ..IntegratorConfig::default()
        }
    }

    pub fn classify(&self) -> ClassifyConfig<f64> {
        ClassifyConfig {
            integrator: self.integrator(),
            eq_tol: self.eq_tol,
            eq_window: self.eq_window,
            cycle_tol: self.cycle_tol,
            period_tol: self.period_tol,
            cycle_confirmations: self.cycle_confirmations,
            exit_tol: self.exit_tol,
            entry_offset: self.entry_offset,
            section: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("max_step", self.max_step),
            ("horizon", self.horizon),
            ("event_tol", self.event_tol),
            ("eq_tol", self.eq_tol),
            ("cycle_tol", self.cycle_tol),
            ("period_tol", self.period_tol),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(CliError::usage(format!("integrator.{name} must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// κ values classified one by one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<[f64; 2]>,
    /// Initial states for three-dimensional runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_states: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub a2: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Reads a config file; a previously written report is accepted too, in
    /// which case its `config` member is used.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let value = match value {
            serde_json::Value::Object(mut m) if m.contains_key("config") && m.contains_key("annotations") => {
                m.remove("config").unwrap_or_default()
            }
            v => v,
        };
        let cfg: RunConfig = serde_json::from_value(value)?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        for (name, x) in [("kappa", o.kappa), ("a2", o.a2), ("eps", o.eps)] {
            if let Some(x) = x {
                if !x.is_finite() {
                    return Err(CliError::usage(format!("--{name} must be finite")));
                }
            }
        }
        if let Some(k) = o.kappa {
            if k <= 0.0 {
                return Err(CliError::usage("--kappa must be positive"));
            }
            self.system.kappa = Some(k);
            // an explicit κ replaces any grid or scan
            self.experiment.kappa_grid = None;
            self.experiment.scan = None;
        }
        if o.a2.is_some() {
            self.system.a2 = o.a2;
        }
        if let Some(e) = o.eps {
            if e <= 0.0 {
                return Err(CliError::usage("--eps must be positive"));
            }
            self.switching.eps = Some(e);
        }
        if o.seed.is_some() {
            self.experiment.seed = o.seed;
        }
        Ok(())
    }
}

/// Fills `slot` with `default` when empty and returns the value.
pub fn resolve<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

/// The exact rational a decimal input denotes, so `1.1` becomes 11/10 rather
/// than the nearest double.
pub fn decimal_rational(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(CliError::usage(format!("{x} is not a finite number")));
    }
    let s = format!("{x}");
    let (int, frac) = s.split_once('.').unwrap_or((s.as_str(), ""));
    let digits: String = format!("{int}{frac}");
    let num: num_bigint::BigInt = digits.parse().map_err(|_| CliError::usage(format!("cannot read {s} as a decimal")))?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    Ok(Rational::new(num, den))
}
