//! Facility parameterisation and the four reference configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::kernel::{DailySchedule, DistributionSpec};

/// Service and stay distributions shared by every configuration, in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceTable {
    pub doctor_opd: DistributionSpec,
    pub pharmacy: DistributionSpec,
    pub lab: DistributionSpec,
    pub ncd_check: DistributionSpec,
    pub doctor_inpatient: DistributionSpec,
    pub nurse_inpatient: DistributionSpec,
    pub nurse_childbirth: DistributionSpec,
    pub doctor_childbirth: DistributionSpec,
    pub inpatient_bed: DistributionSpec,
    pub labour_bed: DistributionSpec,
    pub post_delivery_bed: DistributionSpec,
    pub anc_nurse: DistributionSpec,
    pub lab_report_delay: DistributionSpec,
}

impl Default for ServiceTable {
    fn default() -> Self {
        Self {
            doctor_opd: DistributionSpec::normal(0.87, 0.21, 0.5),
            pharmacy: DistributionSpec::normal(2.08, 0.72, 40.0 / 60.0),
            lab: DistributionSpec::normal(3.45, 0.82, 2.0),
            ncd_check: DistributionSpec::uniform(2.0, 5.0),
            doctor_inpatient: DistributionSpec::uniform(10.0, 30.0),
            nurse_inpatient: DistributionSpec::uniform(30.0, 60.0),
            nurse_childbirth: DistributionSpec::uniform(120.0, 240.0),
            doctor_childbirth: DistributionSpec::uniform(30.0, 60.0),
            inpatient_bed: DistributionSpec::triangular(60.0, 180.0, 360.0),
            labour_bed: DistributionSpec::uniform(300.0, 600.0),
            post_delivery_bed: DistributionSpec::uniform(240.0, 1440.0),
            anc_nurse: DistributionSpec::uniform(15.0, 45.0),
            lab_report_delay: DistributionSpec::uniform(5.0, 10.0),
        }
    }
}

impl ServiceTable {
    fn entries(&self) -> [(&'static str, &DistributionSpec); 13] {
        [
            ("doctor_opd", &self.doctor_opd),
            ("pharmacy", &self.pharmacy),
            ("lab", &self.lab),
            ("ncd_check", &self.ncd_check),
            ("doctor_inpatient", &self.doctor_inpatient),
            ("nurse_inpatient", &self.nurse_inpatient),
            ("nurse_childbirth", &self.nurse_childbirth),
            ("doctor_childbirth", &self.doctor_childbirth),
            ("inpatient_bed", &self.inpatient_bed),
            ("labour_bed", &self.labour_bed),
            ("post_delivery_bed", &self.post_delivery_bed),
            ("anc_nurse", &self.anc_nurse),
            ("lab_report_delay", &self.lab_report_delay),
        ]
    }
}

/// How the two follow-up probabilities combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowupBookkeeping {
    /// `p_two` of patients return at least once and `p_three` (a subset)
    /// return twice: mean visits `1 + p_two + p_three`.
    #[default]
    Nested,
    /// `p_two` make exactly two visits and `p_three` exactly three: mean
    /// visits `1 + p_two + 2 p_three`.
    Exclusive,
}

impl FollowupBookkeeping {
    pub fn visits_per_patient(&self, p_two: f64, p_three: f64) -> f64 {
        match self {
            Self::Nested => 1.0 + p_two + p_three,
            Self::Exclusive => 1.0 + p_two + 2.0 * p_three,
        }
    }
}

/// What an inpatient does when every inpatient bed is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BedFullPolicy {
    #[default]
    Wait,
    Refer,
}

/// Which staff member carries a block of administrative work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdminAssignee {
    Owner,
    StaffNurse,
}

/// Full model drops nothing; validation mode runs without follow-up visits
/// or administrative work so the doctor's load matches the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    #[default]
    Full,
    Validation,
}

/// Share of childbirth cases needing no, one third of, or the full doctor
/// time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChildbirthMix {
    pub none: f64,
    pub one_third: f64,
    pub full: f64,
}

impl Default for ChildbirthMix {
    fn default() -> Self {
        Self {
            none: 0.5,
            one_third: 0.3,
            full: 0.2,
        }
    }
}

impl ChildbirthMix {
    pub fn expected_factor(&self) -> f64 {
        self.one_third / 3.0 + self.full
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhcConfiguration {
    pub config_id: u8,
    /// Minutes of OPD time between first outpatient visits.
    pub opd_interarrival_mean: f64,
    /// Calendar minutes between inpatient arrivals.
    pub ipd_interarrival_mean: f64,
    /// Calendar minutes between childbirth arrivals; `None` when the facility
    /// offers no childbirth care.
    pub childbirth_interarrival_mean: Option<f64>,
    /// Calendar minutes between new antenatal patients, realised within OPD
    /// hours.
    pub anc_interarrival_mean: Option<f64>,
    pub n_doctors: u32,
    /// Staff nurses on the roster; exactly one is on duty at a time.
    pub n_staff_nurses: u32,
    pub n_inpatient_beds: u32,
    pub n_labour_beds: u32,
    pub services: ServiceTable,
    pub p_age_30_plus: f64,
    pub p_lab_referral: f64,
    pub p_lab_point_of_care: f64,
    pub p_followup_two_visits: f64,
    pub p_followup_three_visits: f64,
    pub followup_bookkeeping: FollowupBookkeeping,
    /// Whole days until a follow-up, inclusive range.
    pub followup_gap_days: (u32, u32),
    pub anc_visits: u32,
    /// Days between antenatal visits, rounded to whole days.
    pub anc_gap_days: DistributionSpec,
    /// Daily facility total, split across the doctor pool.
    pub doctor_admin_total: DistributionSpec,
    /// Admin is queued in blocks of at most this many minutes, each of
    /// which runs uninterrupted once started.
    pub admin_block_minutes: f64,
    pub ncd_admin_total: DistributionSpec,
    pub nurse_admin_per_shift: f64,
    pub shift_starts: Vec<f64>,
    pub referral_threshold: f64,
    pub opd_window: DailySchedule,
    pub inpatient_bed_full: BedFullPolicy,
    pub mode: ModelMode,
    pub doctor_admin_by: AdminAssignee,
    pub ncd_admin_by: AdminAssignee,
    /// Fraction of NCD checks done by the staff nurse instead.
    pub ncd_assist_fraction: f64,
    pub childbirth_mix: Option<ChildbirthMix>,
}

impl PhcConfiguration {
    pub fn childbirth_enabled(&self) -> bool {
        self.childbirth_interarrival_mean.is_some()
    }

    pub fn anc_enabled(&self) -> bool {
        self.anc_interarrival_mean.is_some()
    }

    /// Expected outpatient visits per day, follow-ups included.
    pub fn expected_visits_per_day(&self) -> f64 {
        let first = rate_per(self.opd_interarrival_mean, self.opd_window.window_minutes());
        match self.mode {
            ModelMode::Validation => first,
            ModelMode::Full => {
                first
                    * self
                        .followup_bookkeeping
                        .visits_per_patient(self.p_followup_two_visits, self.p_followup_three_visits)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let range = |field: &str, value: f64, reason: &str| ModelError::OutOfRange {
            field: field.to_owned(),
            value,
            reason: reason.to_owned(),
        };
        for (field, p) in [
            ("p_age_30_plus", self.p_age_30_plus),
            ("p_lab_referral", self.p_lab_referral),
            ("p_lab_point_of_care", self.p_lab_point_of_care),
            ("p_followup_two_visits", self.p_followup_two_visits),
            ("p_followup_three_visits", self.p_followup_three_visits),
            ("ncd_assist_fraction", self.ncd_assist_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(range(field, p, "probability must lie in [0, 1]"));
            }
        }
        let (p2, p3) = (self.p_followup_two_visits, self.p_followup_three_visits);
        match self.followup_bookkeeping {
            FollowupBookkeeping::Exclusive if p2 + p3 > 1.0 => {
                return Err(range("p_followup_three_visits", p3, "follow-up shares exceed 1"));
            }
            FollowupBookkeeping::Nested if p3 > p2 => {
                return Err(range("p_followup_three_visits", p3, "must not exceed the two-visit share"));
            }
            _ => {}
        }
        for (field, v) in [
            ("opd_interarrival_mean", Some(self.opd_interarrival_mean)),
            ("ipd_interarrival_mean", Some(self.ipd_interarrival_mean)),
            ("childbirth_interarrival_mean", self.childbirth_interarrival_mean),
            ("anc_interarrival_mean", self.anc_interarrival_mean),
        ] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(range(field, v, "interarrival mean must be positive (infinite disables)"));
                }
            }
        }
        if self.n_doctors == 0 {
            return Err(range("n_doctors", 0.0, "need at least one doctor"));
        }
        if self.n_inpatient_beds == 0 {
            return Err(range("n_inpatient_beds", 0.0, "need at least one inpatient bed"));
        }
        if self.childbirth_enabled() && self.n_labour_beds == 0 {
            return Err(range("n_labour_beds", 0.0, "childbirth care needs a labour bed"));
        }
        if self.followup_gap_days.0 == 0 || self.followup_gap_days.0 > self.followup_gap_days.1 {
            return Err(range(
                "followup_gap_days",
                self.followup_gap_days.0 as f64,
                "need 1 <= min <= max",
            ));
        }
        if !(self.admin_block_minutes > 0.0) {
            return Err(range("admin_block_minutes", self.admin_block_minutes, "must be positive"));
        }
        if !(self.referral_threshold >= 0.0) {
            return Err(range("referral_threshold", self.referral_threshold, "must be nonnegative"));
        }
        if !(self.nurse_admin_per_shift >= 0.0) {
            return Err(range("nurse_admin_per_shift", self.nurse_admin_per_shift, "must be nonnegative"));
        }
        if let Some(m) = self.childbirth_mix {
            let total = m.none + m.one_third + m.full;
            if [m.none, m.one_third, m.full].iter().any(|p| !(0.0..=1.0).contains(p)) || (total - 1.0).abs() > 1e-9 {
                return Err(range("childbirth_mix", total, "shares must be probabilities summing to 1"));
            }
        }
        for (name, d) in self.services.entries() {
            d.validate().map_err(|e| ModelError::Distribution(format!("services.{name}: {e}")))?;
        }
        for (name, d) in [
            ("anc_gap_days", &self.anc_gap_days),
            ("doctor_admin_total", &self.doctor_admin_total),
            ("ncd_admin_total", &self.ncd_admin_total),
        ] {
            d.validate().map_err(|e| ModelError::Distribution(format!("{name}: {e}")))?;
        }
        Ok(())
    }

    /// Apply one named numeric override. Rates expressed per day are
    /// converted to interarrival means; `consult_mean` rescales the whole
    /// consult distribution so its spread stays proportional.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ModelError> {
        let range = |reason: &str| ModelError::OutOfRange {
            field: key.to_owned(),
            value,
            reason: reason.to_owned(),
        };
        let count = |v: f64| -> Result<u32, ModelError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(range("must be a nonnegative whole number"))
            }
        };
        let positive = |v: f64| if v > 0.0 { Ok(v) } else { Err(range("must be positive")) };
        let per_day = |v: f64, minutes: f64| -> Result<f64, ModelError> {
            if v > 0.0 {
                Ok(minutes / v)
            } else if v == 0.0 {
                Ok(f64::INFINITY)
            } else {
                Err(range("must be nonnegative"))
            }
        };
        let window = self.opd_window.window_minutes();
        let childbirth_only = |cfg: &Self| {
            if cfg.childbirth_enabled() {
                Ok(())
            } else {
                Err(ModelError::PathwayDisabled(key.to_owned()))
            }
        };
        let anc_only = |cfg: &Self| {
            if cfg.anc_enabled() {
                Ok(())
            } else {
                Err(ModelError::PathwayDisabled(key.to_owned()))
            }
        };
        match key {
            "opd_iat" => self.opd_interarrival_mean = positive(value)?,
            "opd_first_visits_per_day" => self.opd_interarrival_mean = per_day(value, window)?,
            "ipd_iat" => self.ipd_interarrival_mean = positive(value)?,
            "inpatients_per_day" => self.ipd_interarrival_mean = per_day(value, 1440.0)?,
            "childbirth_iat" => {
                childbirth_only(self)?;
                self.childbirth_interarrival_mean = Some(positive(value)?);
            }
            "childbirth_per_day" => {
                childbirth_only(self)?;
                self.childbirth_interarrival_mean = Some(per_day(value, 1440.0)?);
            }
            "anc_iat" => {
                anc_only(self)?;
                self.anc_interarrival_mean = Some(positive(value)?);
            }
            "anc_per_day" => {
                anc_only(self)?;
                self.anc_interarrival_mean = Some(per_day(value, 1440.0)?);
            }
            "non_opd_load_factor" => {
                let f = positive(value)?;
                self.ipd_interarrival_mean /= f;
                if let Some(m) = self.childbirth_interarrival_mean.as_mut() {
                    *m /= f;
                }
                if let Some(m) = self.anc_interarrival_mean.as_mut() {
                    *m /= f;
                }
            }
            "consult_mean" => {
                let target = positive(value)?;
                let DistributionSpec::Normal { mean, .. } = self.services.doctor_opd else {
                    return Err(range("consult distribution is not normal"));
                };
                self.services.doctor_opd = self.services.doctor_opd.scaled(target / mean);
            }
            "consult_sd" | "consult_lower_bound" => {
                let DistributionSpec::Normal { mean, sd, lower_bound } = self.services.doctor_opd else {
                    return Err(range("consult distribution is not normal"));
                };
                self.services.doctor_opd = if key == "consult_sd" {
                    DistributionSpec::normal(mean, value, lower_bound)
                } else {
                    DistributionSpec::normal(mean, sd, value)
                };
            }
            "n_doctors" => self.n_doctors = count(value)?,
            "n_inpatient_beds" => self.n_inpatient_beds = count(value)?,
            "n_labour_beds" => {
                childbirth_only(self)?;
                self.n_labour_beds = count(value)?;
            }
            "p_age_30_plus" => self.p_age_30_plus = value,
            "p_lab_referral" => self.p_lab_referral = value,
            "p_lab_point_of_care" => self.p_lab_point_of_care = value,
            "p_followup_two_visits" => self.p_followup_two_visits = value,
            "p_followup_three_visits" => self.p_followup_three_visits = value,
            "ncd_assist_fraction" => self.ncd_assist_fraction = value,
            "referral_threshold" => {
                childbirth_only(self)?;
                self.referral_threshold = value;
            }
            "doctor_admin_mean" => self.doctor_admin_total = rescale_mean(&self.doctor_admin_total, value, key)?,
            "ncd_admin_mean" => self.ncd_admin_total = rescale_mean(&self.ncd_admin_total, value, key)?,
            "nurse_admin_per_shift" => self.nurse_admin_per_shift = value,
            "admin_block_minutes" => self.admin_block_minutes = value,
            _ => return Err(ModelError::UnknownField(key.to_owned())),
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, overrides: &BTreeMap<String, f64>) -> Result<(), ModelError> {
        for (k, v) in overrides {
            self.set(k, *v)?;
        }
        self.validate()
    }
}

/// Keys accepted by [`PhcConfiguration::set`].
pub const OVERRIDE_KEYS: &[&str] = &[
    "opd_iat",
    "opd_first_visits_per_day",
    "ipd_iat",
    "inpatients_per_day",
    "childbirth_iat",
    "childbirth_per_day",
    "anc_iat",
    "anc_per_day",
    "non_opd_load_factor",
    "consult_mean",
    "consult_sd",
    "consult_lower_bound",
    "n_doctors",
    "n_inpatient_beds",
    "n_labour_beds",
    "p_age_30_plus",
    "p_lab_referral",
    "p_lab_point_of_care",
    "p_followup_two_visits",
    "p_followup_three_visits",
    "ncd_assist_fraction",
    "referral_threshold",
    "doctor_admin_mean",
    "ncd_admin_mean",
    "nurse_admin_per_shift",
    "admin_block_minutes",
];

fn rescale_mean(d: &DistributionSpec, target: f64, key: &str) -> Result<DistributionSpec, ModelError> {
    let current = d.nominal_mean();
    if target == 0.0 {
        return Ok(DistributionSpec::constant(0.0));
    }
    if !(target > 0.0 && current > 0.0) {
        return Err(ModelError::OutOfRange {
            field: key.to_owned(),
            value: target,
            reason: "must be nonnegative".to_owned(),
        });
    }
    Ok(d.scaled(target / current))
}

fn rate_per(interarrival: f64, minutes: f64) -> f64 {
    if interarrival.is_finite() {
        minutes / interarrival
    } else {
        0.0
    }
}

/// One of the four reference facilities with the given overrides applied.
pub fn build_configuration(config_id: u8, overrides: &BTreeMap<String, f64>) -> Result<PhcConfiguration, ModelError> {
    let (opd, childbirth, anc, doctors) = match config_id {
        1 => (4.0, Some(1440.0), Some(1440.0), 2),
        2 => (9.0, Some(2880.0), Some(2880.0), 1),
        3 => (9.0, None, None, 1),
        4 => (3.0, Some(1440.0), Some(1440.0), 2),
        other => return Err(ModelError::UnknownConfiguration(other)),
    };
    let mut services = ServiceTable::default();
    if config_id == 4 {
        services.doctor_opd = DistributionSpec::normal(5.0, 1.0, 2.0);
    }
    let mut cfg = PhcConfiguration {
        config_id,
        opd_interarrival_mean: opd,
        ipd_interarrival_mean: 2880.0,
        childbirth_interarrival_mean: childbirth,
        anc_interarrival_mean: anc,
        n_doctors: doctors,
        n_staff_nurses: 4,
        n_inpatient_beds: 6,
        n_labour_beds: if childbirth.is_some() { 1 } else { 0 },
        services,
        p_age_30_plus: 0.645,
        p_lab_referral: 0.44,
        p_lab_point_of_care: 0.8,
        p_followup_two_visits: 0.2,
        p_followup_three_visits: 0.1,
        followup_bookkeeping: FollowupBookkeeping::Nested,
        followup_gap_days: (3, 8),
        anc_visits: 4,
        anc_gap_days: DistributionSpec::uniform(42.0, 70.0),
        doctor_admin_total: DistributionSpec::normal(100.0, 20.0, 0.0),
        admin_block_minutes: 10.0,
        ncd_admin_total: DistributionSpec::normal(85.0, 17.0, 0.0),
        nurse_admin_per_shift: 60.0,
        shift_starts: vec![0.0, 480.0, 960.0],
        referral_threshold: 120.0,
        opd_window: DailySchedule::new(480.0, 840.0, true).expect("static window"),
        inpatient_bed_full: BedFullPolicy::Wait,
        mode: ModelMode::Full,
        doctor_admin_by: AdminAssignee::Owner,
        ncd_admin_by: AdminAssignee::Owner,
        ncd_assist_fraction: 0.0,
        childbirth_mix: None,
    };
    cfg.apply_overrides(overrides)?;
    Ok(cfg)
}
