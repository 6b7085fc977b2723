//! Builds the doctor-pool job classes of a facility for the closed-form
//! estimates: outpatients without revisits, inpatients and childbirth cases,
//! with no admin work.

use serde::{Deserialize, Serialize};

use super::JobClassSpec;
use crate::kernel::{DistributionSpec, MINUTES_PER_DAY};
use crate::model::PhcConfiguration;

/// Which mean a truncated service distribution contributes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanConvention {
    /// The location parameter as tabulated.
    #[default]
    Nominal,
    /// The mean after truncation, which is what the simulation draws.
    Exact,
}

/// How round-the-clock arrival streams are charged to a doctor who only
/// takes new work during the OPD window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCoverage {
    /// Scale the calendar rate by the open share of the day.
    #[default]
    WindowFraction,
    /// Charge the full calendar rate.
    Full,
    Fixed(f64),
}

impl WindowCoverage {
    pub fn factor(&self, cfg: &PhcConfiguration) -> f64 {
        match *self {
            WindowCoverage::WindowFraction => cfg.opd_window.window_minutes() / MINUTES_PER_DAY,
            WindowCoverage::Full => 1.0,
            WindowCoverage::Fixed(f) => f,
        }
    }
}

fn moments(d: &DistributionSpec, convention: MeanConvention) -> (f64, f64) {
    let mean = match convention {
        MeanConvention::Nominal => d.nominal_mean(),
        MeanConvention::Exact => d.mean(),
    };
    (mean, d.variance())
}

fn rate(interarrival: Option<f64>) -> f64 {
    match interarrival {
        Some(m) if m.is_finite() && m > 0.0 => 1.0 / m,
        _ => 0.0,
    }
}

/// Outpatient, inpatient and childbirth classes at the doctor pool, in that
/// order. The outpatient rate is per OPD minute; the other two are calendar
/// rates scaled by `coverage`. Disabled pathways come back with zero rate so
/// indices stay fixed.
pub fn validation_classes(
    cfg: &PhcConfiguration,
    convention: MeanConvention,
    coverage: WindowCoverage,
) -> Vec<JobClassSpec> {
    let f = coverage.factor(cfg);
    let s = &cfg.services;
    let mut childbirth = s.doctor_childbirth;
    if let Some(mix) = cfg.childbirth_mix {
        childbirth = childbirth.scaled(mix.expected_factor());
    }
    [
        ("outpatient", rate(Some(cfg.opd_interarrival_mean)), &s.doctor_opd),
        ("inpatient", f * rate(Some(cfg.ipd_interarrival_mean)), &s.doctor_inpatient),
        ("childbirth", f * rate(cfg.childbirth_interarrival_mean), &childbirth),
    ]
    .into_iter()
    .map(|(name, lambda, dist)| {
        let (mean, var) = moments(dist, convention);
        JobClassSpec::new(name, lambda, mean, cfg.n_doctors).with_variance(var)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{additive_utilization, class_utilization};
    use crate::model::build_configuration;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    #[test]
    fn config_three_has_no_childbirth_load() {
        let c3 = build_configuration(3, &BTreeMap::new()).unwrap();
        let cs = validation_classes(&c3, MeanConvention::Nominal, WindowCoverage::default());
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2].arrival_rate, 0.0);
        assert_abs_diff_eq!(class_utilization(&cs[0]).unwrap(), 0.87 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn coverage_scales_only_calendar_classes() {
        let c1 = build_configuration(1, &BTreeMap::new()).unwrap();
        let quarter = validation_classes(&c1, MeanConvention::Nominal, WindowCoverage::WindowFraction);
        let full = validation_classes(&c1, MeanConvention::Nominal, WindowCoverage::Full);
        assert_eq!(quarter[0], full[0]);
        assert_abs_diff_eq!(quarter[1].arrival_rate * 4.0, full[1].arrival_rate, epsilon = 1e-15);
        let off = validation_classes(&c1, MeanConvention::Nominal, WindowCoverage::Fixed(0.0));
        assert_abs_diff_eq!(
            additive_utilization(&off).unwrap(),
            class_utilization(&off[0]).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn exact_mean_exceeds_nominal_under_truncation() {
        let c1 = build_configuration(1, &BTreeMap::new()).unwrap();
        let n = validation_classes(&c1, MeanConvention::Nominal, WindowCoverage::default());
        let e = validation_classes(&c1, MeanConvention::Exact, WindowCoverage::default());
        assert!(e[0].service_mean > n[0].service_mean);
        assert_eq!(e[1].service_mean, n[1].service_mean);
    }
}
