//! Scripted theorem-level scenarios with machine-checkable verdicts.
//!
//! Every experiment is deterministic given (seed, config); verdicts carry
//! named metrics with pinned tolerances and pass only when every gated
//! metric is within its tolerance. Solver failures fold into a failed
//! verdict with the error recorded in the notes.

mod gauge_validation;
mod halfline_blowup;
mod mass_threshold;
mod nls5_variance;
mod standing_wave;
mod virial_validation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use gauge_validation::GaugeValidationParams;
pub use halfline_blowup::HalflineBlowupParams;
pub use mass_threshold::MassThresholdParams;
pub use nls5_variance::Nls5VarianceParams;
pub use standing_wave::StandingWaveParams;
pub use virial_validation::VirialValidationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    StandingWave,
    MassThreshold,
    HalflineBlowup,
    Nls5Variance,
    VirialValidation,
    GaugeValidation,
}

impl ExperimentName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::StandingWave => "standing-wave",
            ExperimentName::MassThreshold => "mass-threshold",
            ExperimentName::HalflineBlowup => "halfline-blowup",
            ExperimentName::Nls5Variance => "nls5-variance",
            ExperimentName::VirialValidation => "virial-validation",
            ExperimentName::GaugeValidation => "gauge-validation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standing-wave" => Some(ExperimentName::StandingWave),
            "mass-threshold" => Some(ExperimentName::MassThreshold),
            "halfline-blowup" => Some(ExperimentName::HalflineBlowup),
            "nls5-variance" => Some(ExperimentName::Nls5Variance),
            "virial-validation" => Some(ExperimentName::VirialValidation),
            "gauge-validation" => Some(ExperimentName::GaugeValidation),
            _ => None,
        }
    }
}

/// Config as read from JSON: name, free-form parameters, and a seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

/// One named check: `value` must not exceed `tolerance` to pass.
/// Checks without a tolerance are informational.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
}

impl Check {
    pub fn gated(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance: Some(tolerance),
        }
    }

    pub fn info(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance: None,
        }
    }

    pub fn passed(&self) -> bool {
        match self.tolerance {
            Some(tol) => self.value.is_finite() && self.value <= tol,
            None => true,
        }
    }
}

/// Machine-checkable outcome: passed ⇔ every gated metric within tolerance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Verdict {
    pub schema_version: u32,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: String,
}

impl Verdict {
    pub fn from_checks(name: &str, checks: &[Check], notes: impl Into<String>) -> Self {
        let mut metrics = BTreeMap::new();
        let mut tolerances = BTreeMap::new();
        let mut passed = true;
        for c in checks {
            metrics.insert(c.name.clone(), c.value);
            if let Some(tol) = c.tolerance {
                tolerances.insert(c.name.clone(), tol);
                passed &= c.passed();
            }
        }
        Self {
            schema_version: 1,
            name: name.to_string(),
            passed,
            metrics,
            tolerances,
            notes: notes.into(),
        }
    }

    pub fn failure(name: &str, notes: impl Into<String>) -> Self {
        Self {
            schema_version: 1,
            name: name.to_string(),
            passed: false,
            metrics: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            notes: notes.into(),
        }
    }
}

/// Experiment result: the verdict plus named artifact files (CSV bytes) for
/// the caller to write.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub verdict: Verdict,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

fn params_from<T: for<'de> Deserialize<'de> + Default>(value: &serde_json::Value) -> Result<T> {
    if value.is_null() {
        Ok(T::default())
    } else {
        Ok(serde_json::from_value(value.clone())?)
    }
}

/// Run one experiment. Configuration errors surface as `Err`; solver
/// failures inside a well-formed experiment fold into a failed verdict.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.name {
        ExperimentName::StandingWave => {
            standing_wave::run(&params_from::<StandingWaveParams>(&cfg.parameters)?)
        }
        ExperimentName::MassThreshold => {
            mass_threshold::run(&params_from::<MassThresholdParams>(&cfg.parameters)?)
        }
        ExperimentName::HalflineBlowup => {
            halfline_blowup::run(&params_from::<HalflineBlowupParams>(&cfg.parameters)?)
        }
        ExperimentName::Nls5Variance => {
            nls5_variance::run(&params_from::<Nls5VarianceParams>(&cfg.parameters)?)
        }
        ExperimentName::VirialValidation => {
            virial_validation::run(&params_from::<VirialValidationParams>(&cfg.parameters)?)
        }
        ExperimentName::GaugeValidation => gauge_validation::run(
            &params_from::<GaugeValidationParams>(&cfg.parameters)?,
            cfg.seed,
        ),
    }
}
