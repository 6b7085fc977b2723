//! Patient records and the per-transition event log.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatientClass {
    Outpatient,
    Inpatient,
    Childbirth,
    Anc,
    /// Administrative work blocks, not patients.
    Admin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Doctor,
    NcdNurse,
    StaffNurse,
    Pharmacy,
    Lab,
    InpatientBed,
    LabourBed,
}

impl Resource {
    pub const ALL: [Resource; 7] = [
        Resource::Doctor,
        Resource::NcdNurse,
        Resource::StaffNurse,
        Resource::Pharmacy,
        Resource::Lab,
        Resource::InpatientBed,
        Resource::LabourBed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Resource::Doctor => "doctor",
            Resource::NcdNurse => "ncd_nurse",
            Resource::StaffNurse => "staff_nurse",
            Resource::Pharmacy => "pharmacy",
            Resource::Lab => "lab",
            Resource::InpatientBed => "inpatient_bed",
            Resource::LabourBed => "labour_bed",
        }
    }

    /// Resources that only take new work inside the OPD window.
    pub fn windowed(&self) -> bool {
        matches!(
            self,
            Resource::Doctor | Resource::NcdNurse | Resource::Pharmacy | Resource::Lab
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    Completed,
    ReferredOut,
}

/// One visit through one resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub resource: Resource,
    pub queued: f64,
    pub started: f64,
    pub ended: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: u64,
    pub class: PatientClass,
    pub age_30_plus: bool,
    /// 1-based visit number for outpatients and antenatal patients.
    pub visit_index: u8,
    pub arrival_time: f64,
    pub stamps: Vec<Stamp>,
    pub departure_time: Option<f64>,
    pub disposition: Option<Disposition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Arrive,
    Queue,
    Start,
    End,
    Delay,
    Referred,
    Depart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub patient: u64,
    pub class: PatientClass,
    pub resource: Option<Resource>,
    pub event: TraceEvent,
}
