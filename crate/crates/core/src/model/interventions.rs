//! Staffing and capacity changes layered on top of a configuration.

use serde::{Deserialize, Serialize};

use super::config::{AdminAssignee, ChildbirthMix, PhcConfiguration};
use super::ModelError;

/// Default share of NCD checks handed to the staff nurse.
pub const DEFAULT_NCD_ASSIST_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterventionFlags {
    pub nurse_takes_doctor_admin: bool,
    /// `Some` enables the childbirth mix; an empty object picks the default
    /// shares.
    pub childbirth_intervention_mix: Option<ChildbirthMix>,
    pub extra_doctor: bool,
    /// Inpatient beds converted into labour beds.
    pub extra_labour_beds: u32,
    pub inpatient_bed_count_override: Option<u32>,
    pub nurse_takes_ncd_admin: bool,
    pub nurse_assists_ncd_fraction: Option<f64>,
}

impl InterventionFlags {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

pub fn apply_interventions(config: &PhcConfiguration, flags: &InterventionFlags) -> Result<PhcConfiguration, ModelError> {
    let mut c = config.clone();
    if flags.nurse_takes_doctor_admin {
        c.doctor_admin_by = AdminAssignee::StaffNurse;
    }
    if flags.nurse_takes_ncd_admin {
        c.ncd_admin_by = AdminAssignee::StaffNurse;
    }
    if let Some(mix) = flags.childbirth_intervention_mix {
        if !c.childbirth_enabled() {
            return Err(ModelError::Incompatible(
                "childbirth mix on a facility without childbirth care".into(),
            ));
        }
        c.childbirth_mix = Some(mix);
    }
    if flags.extra_doctor {
        c.n_doctors += 1;
    }
    if let Some(beds) = flags.inpatient_bed_count_override {
        c.n_inpatient_beds = beds;
    }
    if flags.extra_labour_beds > 0 {
        if !c.childbirth_enabled() {
            return Err(ModelError::Incompatible(
                "labour beds on a facility without childbirth care".into(),
            ));
        }
        if flags.extra_labour_beds >= c.n_inpatient_beds {
            return Err(ModelError::Incompatible(format!(
                "converting {} of {} inpatient beds leaves none",
                flags.extra_labour_beds, c.n_inpatient_beds
            )));
        }
        c.n_inpatient_beds -= flags.extra_labour_beds;
        c.n_labour_beds += flags.extra_labour_beds;
    }
    if let Some(f) = flags.nurse_assists_ncd_fraction {
        c.ncd_assist_fraction = f;
    }
    c.validate()?;
    Ok(c)
}
