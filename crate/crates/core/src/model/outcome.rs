//! Per-replication outcome vectors and their cross-replication summary.

use serde::{Deserialize, Serialize};

use crate::kernel::Tally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DoctorUtilization,
    NcdNurseUtilization,
    StaffNurseUtilization,
    PharmacistUtilization,
    LabUtilization,
    InpatientBedUtilization,
    LabourBedUtilization,
    OpdQueueLength,
    OpdWait,
    PharmacyQueueLength,
    PharmacyWait,
    LabQueueLength,
    LabWait,
    ReferralFraction,
    OutpatientVisitsPerDay,
}

impl Metric {
    pub const ALL: [Metric; 15] = [
        Metric::DoctorUtilization,
        Metric::NcdNurseUtilization,
        Metric::StaffNurseUtilization,
        Metric::PharmacistUtilization,
        Metric::LabUtilization,
        Metric::InpatientBedUtilization,
        Metric::LabourBedUtilization,
        Metric::OpdQueueLength,
        Metric::OpdWait,
        Metric::PharmacyQueueLength,
        Metric::PharmacyWait,
        Metric::LabQueueLength,
        Metric::LabWait,
        Metric::ReferralFraction,
        Metric::OutpatientVisitsPerDay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::DoctorUtilization => "doctor_utilization",
            Metric::NcdNurseUtilization => "ncd_nurse_utilization",
            Metric::StaffNurseUtilization => "staff_nurse_utilization",
            Metric::PharmacistUtilization => "pharmacist_utilization",
            Metric::LabUtilization => "lab_utilization",
            Metric::InpatientBedUtilization => "inpatient_bed_utilization",
            Metric::LabourBedUtilization => "labour_bed_utilization",
            Metric::OpdQueueLength => "opd_queue_length",
            Metric::OpdWait => "opd_wait",
            Metric::PharmacyQueueLength => "pharmacy_queue_length",
            Metric::PharmacyWait => "pharmacy_wait",
            Metric::LabQueueLength => "lab_queue_length",
            Metric::LabWait => "lab_wait",
            Metric::ReferralFraction => "referral_fraction",
            Metric::OutpatientVisitsPerDay => "outpatient_visits_per_day",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Arrival and departure counts of one patient class over the whole run,
/// warm-up included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCount {
    pub arrived: u64,
    pub completed: u64,
    pub referred: u64,
    pub in_system: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowCounts {
    pub outpatient: FlowCount,
    pub inpatient: FlowCount,
    pub childbirth: FlowCount,
    pub anc: FlowCount,
}

/// Facts used by invariant checks rather than reported outcomes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub flow: FlowCounts,
    /// Longest labour-bed wait among admitted childbirth patients.
    pub max_admitted_labour_wait: f64,
    /// Shortest labour-bed wait among referred childbirth patients.
    pub min_referred_labour_wait: Option<f64>,
    /// Service starts at doctor, NCD, pharmacy or lab for patients who
    /// arrived outside the OPD window.
    pub out_of_window_starts: u64,
    /// Patients that were still queued for an OPD resource at the horizon
    /// despite arriving more than a day earlier.
    pub stranded_outpatients: u64,
    pub doctor_busy_minutes: f64,
    /// Doctor minutes spent on patient services started after warm-up, plus
    /// admin, for audit against `doctor_busy_minutes`.
    pub doctor_sampled_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub seed: u64,
    pub doctor_utilization: f64,
    pub ncd_nurse_utilization: f64,
    pub staff_nurse_utilization: f64,
    pub pharmacist_utilization: f64,
    pub lab_utilization: f64,
    pub inpatient_bed_utilization: f64,
    pub labour_bed_utilization: Option<f64>,
    pub opd_queue_length: f64,
    pub opd_wait: f64,
    pub pharmacy_queue_length: f64,
    pub pharmacy_wait: f64,
    pub lab_queue_length: f64,
    pub lab_wait: f64,
    pub referral_fraction: Option<f64>,
    pub outpatient_visits_per_day: f64,
    pub diagnostics: Diagnostics,
}

impl ReplicationOutcome {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::DoctorUtilization => Some(self.doctor_utilization),
            Metric::NcdNurseUtilization => Some(self.ncd_nurse_utilization),
            Metric::StaffNurseUtilization => Some(self.staff_nurse_utilization),
            Metric::PharmacistUtilization => Some(self.pharmacist_utilization),
            Metric::LabUtilization => Some(self.lab_utilization),
            Metric::InpatientBedUtilization => Some(self.inpatient_bed_utilization),
            Metric::LabourBedUtilization => self.labour_bed_utilization,
            Metric::OpdQueueLength => Some(self.opd_queue_length),
            Metric::OpdWait => Some(self.opd_wait),
            Metric::PharmacyQueueLength => Some(self.pharmacy_queue_length),
            Metric::PharmacyWait => Some(self.pharmacy_wait),
            Metric::LabQueueLength => Some(self.lab_queue_length),
            Metric::LabWait => Some(self.lab_wait),
            Metric::ReferralFraction => self.referral_fraction,
            Metric::OutpatientVisitsPerDay => Some(self.outpatient_visits_per_day),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    /// `None` when the metric does not apply to the facility.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub base_seed: u64,
    pub replications: Vec<ReplicationOutcome>,
    pub summary: Vec<MetricSummary>,
}

impl OutcomeReport {
    pub fn new(base_seed: u64, replications: Vec<ReplicationOutcome>) -> Self {
        let summary = Metric::ALL
            .into_iter()
            .map(|metric| {
                let t: Tally = replications.iter().filter_map(|r| r.get(metric)).collect();
                let n = t.count() as usize;
                MetricSummary {
                    metric,
                    mean: (n > 0).then(|| t.mean()),
                    sd: (n > 0).then(|| t.sd()),
                    n,
                }
            })
            .collect();
        Self {
            base_seed,
            replications,
            summary,
        }
    }

    pub fn summary_of(&self, metric: Metric) -> &MetricSummary {
        self.summary
            .iter()
            .find(|s| s.metric == metric)
            .expect("summary covers every metric")
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.summary_of(metric).mean
    }

    pub fn sd(&self, metric: Metric) -> Option<f64> {
        self.summary_of(metric).sd
    }

    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.replications.iter().filter_map(|r| r.get(metric)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(Metric::from_name(m.name()), Some(m));
        }
        assert_eq!(Metric::ALL.len(), 15);
    }
}
