//! Experiment orchestration: scenario files, sweeps, reproduction of the
//! published exhibits, and table export.

mod reproduce;
mod scenario;
mod sweep;
mod table;

pub use reproduce::{
    intervention_flags, reproduce, Exhibit, Profile, ReproduceOptions, CONFIG_LABELS, FIG2_CONSULT, FIG2_OPD_IAT,
    FIG3_CONSULT, FIG3_LOAD, FIG4_BIRTHS, FIG4_EXTRA_BEDS, INTERVENTION_ROWS, TABLE5_RHO_A, TABLE5_RHO_HAT,
    TABLE6_TARGETS, TABLEC1_RHO_AP, TABLEC1_RHO_O,
};
pub use scenario::{
    parse_scenario, ConfigurationRef, Outputs, Scenario, ScenarioSpec, DEFAULT_MAX_SCENARIOS, DEFAULT_SEED,
    INTERVENTION_AXES, SCHEMA_VERSION,
};
pub use sweep::{outcome_columns, row_from_report, run_scenarios, run_sweep};
pub use table::{format_sig, round_sig, Cell, Check, CheckKind, Failure, Format, ResultTable, Row, TableError};

use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::analytics::AnalyticsError;
use crate::model::{ModelError, TraceRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema_version {0} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("sweep expands to {count} scenarios, above the cap of {cap}")]
    TooManyScenarios { count: usize, cap: usize },
    #[error("unknown exhibit `{0}`; expected one of table5, table6, tableC1, fig2, fig3, fig4, interventions")]
    UnknownExhibit(String),
    #[error("cannot access {path}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

/// One CSV line per patient transition.
pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = io::BufWriter::new(file);
    writeln!(w, "time,patient,class,resource,event").map_err(io_err)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_sig(r.time),
            r.patient,
            snake(&r.class),
            r.resource.map(|x| x.name()).unwrap_or(""),
            snake(&r.event)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn snake<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}
