//! Primary health centre model: four patient pathways over shared staff and
//! beds, the reference configurations, and the intervention toggles.

mod config;
mod interventions;
mod outcome;
mod patient;
mod phc;
mod simulate;

pub use config::{
    build_configuration, AdminAssignee, BedFullPolicy, ChildbirthMix, FollowupBookkeeping, ModelMode,
    PhcConfiguration, ServiceTable, OVERRIDE_KEYS,
};
pub use interventions::{apply_interventions, InterventionFlags, DEFAULT_NCD_ASSIST_FRACTION};
pub use outcome::{Diagnostics, FlowCount, FlowCounts, Metric, MetricSummary, OutcomeReport, ReplicationOutcome};
pub use patient::{Disposition, PatientClass, PatientRecord, Resource, Stamp, TraceEvent, TraceRecord};
pub use phc::{PhcModel, PhcRun};
pub use simulate::{run_replication, simulate, RunLength};

use thiserror::Error;

use crate::kernel::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown configuration {0}; expected 1 to 4")]
    UnknownConfiguration(u8),
    #[error("unknown configuration field `{0}`")]
    UnknownField(String),
    #[error("`{field}` = {value}: {reason}")]
    OutOfRange { field: String, value: f64, reason: String },
    #[error("`{0}` refers to a pathway this facility does not offer")]
    PathwayDisabled(String),
    #[error("incompatible interventions: {0}")]
    Incompatible(String),
    #[error("invalid distribution {0}")]
    Distribution(String),
    #[error("need at least one replication")]
    NoReplications,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
