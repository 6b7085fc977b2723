//! Scenario files: one facility, a replication budget, interventions and
//! optional sweep axes expanded as a Cartesian product.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::model::{
    apply_interventions, build_configuration, InterventionFlags, ModelError, ModelMode, PhcConfiguration, RunLength,
    OVERRIDE_KEYS,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_190_801;
pub const DEFAULT_MAX_SCENARIOS: usize = 256;

/// Sweep axes that act on the intervention flags rather than on the
/// configuration. Boolean flags take 0 or 1.
pub const INTERVENTION_AXES: &[&str] = &[
    "extra_labour_beds",
    "extra_doctor",
    "nurse_takes_doctor_admin",
    "nurse_takes_ncd_admin",
    "nurse_assists_ncd_fraction",
    "inpatient_bed_count_override",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationRef {
    pub id: u8,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    #[serde(default)]
    pub mode: ModelMode,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Event log of the first replication of the first scenario.
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub configuration: ConfigurationRef,
    #[serde(default = "defaults::replications")]
    pub replications: u32,
    #[serde(default = "defaults::horizon_days")]
    pub horizon_days: f64,
    #[serde(default = "defaults::warmup_days")]
    pub warmup_days: f64,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    /// Axis name to values. Axes iterate in name order, the last one
    /// fastest.
    #[serde(default)]
    pub sweep: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub interventions: InterventionFlags,
    #[serde(default = "defaults::max_scenarios")]
    pub max_scenarios: usize,
    #[serde(default)]
    pub outputs: Outputs,
}

mod defaults {
    use crate::model::RunLength;

    pub fn replications() -> u32 {
        RunLength::default().replications
    }
    pub fn horizon_days() -> f64 {
        RunLength::default().horizon_days
    }
    pub fn warmup_days() -> f64 {
        RunLength::default().warmup_days
    }
    pub fn seed() -> u64 {
        super::DEFAULT_SEED
    }
    pub fn max_scenarios() -> usize {
        super::DEFAULT_MAX_SCENARIOS
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub coordinates: Vec<(String, f64)>,
    /// `Err` when this point of the grid is not a valid facility; the other
    /// points still run.
    pub config: Result<PhcConfiguration, ModelError>,
}

fn invalid(path: impl Into<String>, message: impl ToString) -> HarnessError {
    HarnessError::Invalid {
        path: path.into(),
        message: message.to_string(),
    }
}

impl ScenarioSpec {
    /// A single-scenario spec with default budget.
    pub fn for_configuration(id: u8) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            configuration: ConfigurationRef {
                id,
                overrides: BTreeMap::new(),
                mode: ModelMode::Full,
            },
            replications: defaults::replications(),
            horizon_days: defaults::horizon_days(),
            warmup_days: defaults::warmup_days(),
            seed: DEFAULT_SEED,
            sweep: BTreeMap::new(),
            interventions: InterventionFlags::default(),
            max_scenarios: DEFAULT_MAX_SCENARIOS,
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn run_length(&self) -> RunLength {
        RunLength {
            replications: self.replications,
            horizon_days: self.horizon_days,
            warmup_days: self.warmup_days,
        }
    }

    pub fn scenario_count(&self) -> usize {
        self.sweep.values().map(Vec::len).product()
    }

    /// The unswept facility, with interventions applied.
    pub fn base_configuration(&self) -> Result<PhcConfiguration, HarnessError> {
        let mut cfg = build_configuration(self.configuration.id, &BTreeMap::new())
            .map_err(|e| invalid("configuration.id", e))?;
        for (k, v) in &self.configuration.overrides {
            cfg.set(k, *v)
                .map_err(|e| invalid(format!("configuration.overrides.{k}"), e))?;
        }
        cfg.mode = self.configuration.mode;
        cfg.validate().map_err(|e| invalid("configuration.overrides", e))?;
        apply_interventions(&cfg, &self.interventions).map_err(|e| invalid("interventions", e))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::SchemaVersion(self.schema_version));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        self.run_length()
            .horizon()
            .map_err(|e| invalid("horizon_days", e))?;
        for (axis, values) in &self.sweep {
            if !OVERRIDE_KEYS.contains(&axis.as_str()) && !INTERVENTION_AXES.contains(&axis.as_str()) {
                return Err(invalid(format!("sweep.{axis}"), "not a configuration or intervention field"));
            }
            if values.is_empty() {
                return Err(invalid(format!("sweep.{axis}"), "needs at least one value"));
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(invalid(format!("sweep.{axis}[{i}]"), "must be finite"));
            }
        }
        let count = self
            .sweep
            .values()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.len()))
            .unwrap_or(usize::MAX);
        if count > self.max_scenarios {
            return Err(HarnessError::TooManyScenarios {
                count,
                cap: self.max_scenarios,
            });
        }
        self.base_configuration().map(|_| ())
    }

    pub fn scenarios(&self) -> Result<Vec<Scenario>, HarnessError> {
        self.validate()?;
        let axes: Vec<(&String, &Vec<f64>)> = self.sweep.iter().collect();
        let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (axis, values) in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(((*axis).clone(), *v));
                        q
                    })
                })
                .collect();
        }
        Ok(points
            .into_iter()
            .map(|coordinates| Scenario {
                label: label_of(&coordinates, self.configuration.id),
                config: self.configure(&coordinates),
                coordinates,
            })
            .collect())
    }

    fn configure(&self, coordinates: &[(String, f64)]) -> Result<PhcConfiguration, ModelError> {
        let mut overrides = self.configuration.overrides.clone();
        let mut flags = self.interventions.clone();
        for (axis, v) in coordinates {
            if INTERVENTION_AXES.contains(&axis.as_str()) {
                set_flag(&mut flags, axis, *v)?;
            } else {
                overrides.insert(axis.clone(), *v);
            }
        }
        let mut cfg = build_configuration(self.configuration.id, &overrides)?;
        cfg.mode = self.configuration.mode;
        apply_interventions(&cfg, &flags)
    }
}

fn set_flag(flags: &mut InterventionFlags, axis: &str, v: f64) -> Result<(), ModelError> {
    let out_of_range = |reason: &str| ModelError::OutOfRange {
        field: axis.to_owned(),
        value: v,
        reason: reason.to_owned(),
    };
    let whole = || {
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            Err(out_of_range("must be a nonnegative whole number"))
        }
    };
    let flag = || match v {
        0.0 => Ok(false),
        1.0 => Ok(true),
        _ => Err(out_of_range("flag axes take 0 or 1")),
    };
    match axis {
        "extra_labour_beds" => flags.extra_labour_beds = whole()?,
        "extra_doctor" => flags.extra_doctor = flag()?,
        "nurse_takes_doctor_admin" => flags.nurse_takes_doctor_admin = flag()?,
        "nurse_takes_ncd_admin" => flags.nurse_takes_ncd_admin = flag()?,
        "nurse_assists_ncd_fraction" => flags.nurse_assists_ncd_fraction = Some(v),
        "inpatient_bed_count_override" => flags.inpatient_bed_count_override = Some(whole()?),
        other => return Err(ModelError::UnknownField(other.to_owned())),
    }
    Ok(())
}

fn label_of(coordinates: &[(String, f64)], id: u8) -> String {
    if coordinates.is_empty() {
        return format!("config={id}");
    }
    coordinates
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioSpec, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioSpec::from_json(&text)
}
