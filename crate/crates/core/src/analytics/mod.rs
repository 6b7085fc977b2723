//! Closed-form utilization and waiting-time approximations for a server
//! shared by several Poisson job classes, plus the tests used to compare them
//! with simulated utilizations.
//!
//! One class is treated as dominant. Its stand-alone utilization, the sum of
//! all class utilizations and a setup-inflated ("effective process time")
//! utilization bracket what a simulation should report, and two sufficient
//! conditions say when the cheap estimates are statistically good enough.

mod adapter;
mod ttest;

pub use adapter::{validation_classes, MeanConvention, WindowCoverage};
pub use ttest::{one_sample_t, t_from_summary, TTest, TTestForm};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("invalid job class `{0}`")]
    InvalidClass(String),
    #[error("every class has zero utilization")]
    AllZeroUtilization,
    #[error("mean simulated utilization is zero")]
    ZeroMeanUtilization,
    #[error("class index {index} out of range for {len} classes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("setup class `{0}` has no arrivals relative to the dominant class")]
    NonPositiveSetupRatio(String),
    #[error("interval ({lo}, {hi}) is empty")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("utilization {0} leaves no steady state")]
    Unstable(f64),
    #[error("need at least two observations, got {0}")]
    TooFewObservations(usize),
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("{0}")]
    InvalidArgument(String),
}

/// One Poisson job class at a pool of `servers` identical servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobClassSpec {
    pub name: String,
    /// Jobs per minute.
    pub arrival_rate: f64,
    /// Minutes.
    pub service_mean: f64,
    /// Minutes squared; only needed for waiting times.
    #[serde(default)]
    pub service_variance: Option<f64>,
    pub servers: u32,
}

impl JobClassSpec {
    pub fn new(name: impl Into<String>, arrival_rate: f64, service_mean: f64, servers: u32) -> Self {
        Self {
            name: name.into(),
            arrival_rate,
            service_mean,
            service_variance: None,
            servers,
        }
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.service_variance = Some(variance);
        self
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let ok = self.arrival_rate.is_finite()
            && self.arrival_rate >= 0.0
            && self.service_mean.is_finite()
            && self.service_mean > 0.0
            && self.servers > 0
            && self.service_variance.is_none_or(|v| v.is_finite() && v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(AnalyticsError::InvalidClass(self.name.clone()))
        }
    }
}

pub fn class_utilization(spec: &JobClassSpec) -> Result<f64, AnalyticsError> {
    spec.validate()?;
    Ok(spec.arrival_rate * spec.service_mean / spec.servers as f64)
}

/// Sum of the per-class utilizations of a shared pool.
pub fn additive_utilization(classes: &[JobClassSpec]) -> Result<f64, AnalyticsError> {
    classes.iter().map(class_utilization).sum()
}

/// Share of the total utilization contributed by class `index`.
pub fn domination_factor(classes: &[JobClassSpec], index: usize) -> Result<f64, AnalyticsError> {
    let rhos = classes
        .iter()
        .map(class_utilization)
        .collect::<Result<Vec<_>, _>>()?;
    let rho_i = *rhos.get(index).ok_or(AnalyticsError::IndexOutOfRange {
        index,
        len: classes.len(),
    })?;
    let total: f64 = rhos.iter().sum();
    if total <= 0.0 {
        return Err(AnalyticsError::AllZeroUtilization);
    }
    Ok(rho_i / total)
}

/// How the interval half-width multiplier is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KAlpha {
    /// Two-sided standard normal quantile.
    Normal { alpha: f64 },
    /// Two-sided Student t quantile with n - 1 degrees of freedom.
    StudentT { alpha: f64 },
    Fixed(f64),
}

impl Default for KAlpha {
    fn default() -> Self {
        KAlpha::Normal { alpha: 0.05 }
    }
}

impl KAlpha {
    pub fn value(&self, n: usize) -> Result<f64, AnalyticsError> {
        let check = |alpha: f64| {
            if alpha > 0.0 && alpha < 1.0 {
                Ok(1.0 - alpha / 2.0)
            } else {
                Err(AnalyticsError::InvalidArgument(format!("alpha {alpha} outside (0, 1)")))
            }
        };
        match *self {
            KAlpha::Normal { alpha } => {
                let q = check(alpha)?;
                Ok(Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(q))
            }
            KAlpha::StudentT { alpha } => {
                let q = check(alpha)?;
                if n < 2 {
                    return Err(AnalyticsError::TooFewObservations(n));
                }
                let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive dof");
                Ok(t.inverse_cdf(q))
            }
            KAlpha::Fixed(k) if k >= 0.0 && k.is_finite() => Ok(k),
            KAlpha::Fixed(k) => Err(AnalyticsError::InvalidArgument(format!("k_alpha {k} must be nonnegative"))),
        }
    }
}

/// Replication-level utilization estimates of one server pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationSample {
    pub rho_hat: f64,
    pub s_hat: f64,
    pub n: usize,
    pub k_alpha: f64,
}

impl UtilizationSample {
    pub fn new(rho_hat: f64, s_hat: f64, n: usize, k_alpha: f64) -> Result<Self, AnalyticsError> {
        if n < 2 {
            return Err(AnalyticsError::TooFewObservations(n));
        }
        if !(s_hat >= 0.0 && k_alpha >= 0.0 && rho_hat.is_finite()) {
            return Err(AnalyticsError::InvalidArgument(format!(
                "rho_hat {rho_hat}, s_hat {s_hat}, k_alpha {k_alpha}"
            )));
        }
        Ok(Self {
            rho_hat,
            s_hat,
            n,
            k_alpha,
        })
    }

    pub fn from_values(values: &[f64], k: KAlpha) -> Result<Self, AnalyticsError> {
        let t: crate::kernel::Tally = values.iter().copied().collect();
        Self::new(t.mean(), t.sd(), values.len(), k.value(values.len())?)
    }

    /// Relative half-width `k_alpha * s_hat / rho_hat`.
    pub fn relative_half_width(&self) -> Result<f64, AnalyticsError> {
        if self.rho_hat == 0.0 {
            return Err(AnalyticsError::ZeroMeanUtilization);
        }
        Ok(self.k_alpha * self.s_hat / self.rho_hat)
    }
}

/// Sufficient condition for the dominant class's own utilization to stand in
/// for the pool utilization.
pub fn theorem_c1_check(d_1: f64, sample: &UtilizationSample) -> Result<bool, AnalyticsError> {
    Ok(d_1 > 1.0 - sample.relative_half_width()?)
}

/// A non-dominant class folded into the dominant class as setup work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub service_mean: f64,
    pub service_variance: f64,
    /// Dominant jobs served per setup arrival.
    pub jobs_per_setup: f64,
}

/// Mean and variance of a process time inflated by setups, adding one setup
/// class at a time. Setups are applied in the given order; the mean does not
/// depend on it.
pub fn effective_process_time(
    base_mean: f64,
    base_variance: f64,
    setups: &[Setup],
) -> Result<(f64, f64), AnalyticsError> {
    let mut mean = base_mean;
    let mut var = base_variance;
    for s in setups {
        let n = s.jobs_per_setup;
        if !(n > 0.0 && n.is_finite()) {
            return Err(AnalyticsError::NonPositiveSetupRatio(format!("{s:?}")));
        }
        mean += s.service_mean / n;
        var += s.service_variance / n + (n - 1.0) / (n * n) * s.service_mean * s.service_mean;
    }
    Ok((mean, var))
}

pub fn effective_service_time(base_mean: f64, setups: &[Setup]) -> Result<f64, AnalyticsError> {
    Ok(effective_process_time(base_mean, 0.0, setups)?.0)
}

/// Turn every class except `dominant` into a setup, ordered by decreasing
/// utilization. Classes with no arrivals contribute nothing.
pub fn setups_for(classes: &[JobClassSpec], dominant: usize) -> Result<Vec<Setup>, AnalyticsError> {
    let d = classes.get(dominant).ok_or(AnalyticsError::IndexOutOfRange {
        index: dominant,
        len: classes.len(),
    })?;
    d.validate()?;
    if d.arrival_rate <= 0.0 {
        return Err(AnalyticsError::NonPositiveSetupRatio(d.name.clone()));
    }
    let mut others: Vec<(f64, &JobClassSpec)> = classes
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != dominant && c.arrival_rate > 0.0)
        .map(|(_, c)| class_utilization(c).map(|r| (r, c)))
        .collect::<Result<_, _>>()?;
    others.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(others
        .into_iter()
        .map(|(_, c)| Setup {
            service_mean: c.service_mean,
            service_variance: c.service_variance.unwrap_or(0.0),
            jobs_per_setup: d.arrival_rate / c.arrival_rate,
        })
        .collect())
}

/// Utilization of the single-class queue obtained by treating all other
/// classes as setups of the dominant one.
pub fn rho_ap(classes: &[JobClassSpec], dominant: usize) -> Result<f64, AnalyticsError> {
    let setups = setups_for(classes, dominant)?;
    let d = &classes[dominant];
    let mean = effective_service_time(d.service_mean, &setups)?;
    Ok(d.arrival_rate * mean / d.servers as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Open-interval membership, except that a degenerate point interval
    /// contains its own point.
    pub fn contains(&self, x: f64) -> bool {
        if self.lo == self.hi {
            x == self.lo
        } else {
            x > self.lo && x < self.hi
        }
    }
}

/// Range of domination factors for which the setup-inflated utilization is
/// an adequate stand-in. `r` is the relative half-width of the simulated
/// utilization.
pub fn theorem_c2_interval(rho_1: f64, rho_ap: f64, r: f64) -> Result<Interval, AnalyticsError> {
    if !(rho_ap > 0.0) || !(r >= 0.0) {
        return Err(AnalyticsError::InvalidArgument(format!("rho_ap {rho_ap}, r {r}")));
    }
    let ratio = rho_1 / rho_ap;
    let lo = (1.0 - r) * ratio;
    let hi = ((1.0 + r) * ratio).min(1.0);
    if lo > hi || (lo == hi && r > 0.0) {
        return Err(AnalyticsError::EmptyInterval { lo, hi });
    }
    Ok(Interval { lo, hi })
}

/// Mean wait in queue of an M/G/1 queue (Pollaczek-Khinchine).
pub fn mg1_wait(arrival_rate: f64, service_mean: f64, service_variance: f64) -> Result<f64, AnalyticsError> {
    let rho = arrival_rate * service_mean;
    if rho >= 1.0 {
        return Err(AnalyticsError::Unstable(rho));
    }
    Ok(arrival_rate * (service_variance + service_mean * service_mean) / (2.0 * (1.0 - rho)))
}

/// Kingman's two-moment approximation for a G/G/1 queue. Coincides with
/// [`mg1_wait`] when `arrival_scv` is 1.
pub fn kingman_wait(
    arrival_rate: f64,
    arrival_scv: f64,
    service_mean: f64,
    service_variance: f64,
) -> Result<f64, AnalyticsError> {
    let rho = arrival_rate * service_mean;
    if rho >= 1.0 {
        return Err(AnalyticsError::Unstable(rho));
    }
    let service_scv = service_variance / (service_mean * service_mean);
    Ok(0.5 * (arrival_scv + service_scv) * rho / (1.0 - rho) * service_mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub rho_a: f64,
    pub rho_1: f64,
    pub rho_ap: f64,
    pub d_1: f64,
    pub theorem_c1_holds: bool,
    pub theorem_c2_interval: Interval,
    pub theorem_c2_holds: bool,
    /// Test of the simulated utilizations against `rho_ap`.
    pub t_statistic: f64,
    pub p_value: f64,
}

pub fn approximation_report(
    classes: &[JobClassSpec],
    dominant: usize,
    sample: &UtilizationSample,
    form: TTestForm,
) -> Result<ApproximationReport, AnalyticsError> {
    let rho_a = additive_utilization(classes)?;
    let rho_1 = class_utilization(classes.get(dominant).ok_or(AnalyticsError::IndexOutOfRange {
        index: dominant,
        len: classes.len(),
    })?)?;
    let rho_ap = rho_ap(classes, dominant)?;
    let d_1 = domination_factor(classes, dominant)?;
    let r = sample.relative_half_width()?;
    let interval = theorem_c2_interval(rho_1, rho_ap, r)?;
    let t = t_from_summary(sample.rho_hat, sample.s_hat, sample.n, rho_ap, form)?;
    Ok(ApproximationReport {
        rho_a,
        rho_1,
        rho_ap,
        d_1,
        theorem_c1_holds: theorem_c1_check(d_1, sample)?,
        theorem_c2_interval: interval,
        theorem_c2_holds: interval.contains(d_1),
        t_statistic: t.t,
        p_value: t.p,
    })
}

/// Input of a stand-alone analysis: the classes sharing one pool and,
/// optionally, simulated utilizations to judge the approximations against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassesFile {
    pub classes: Vec<JobClassSpec>,
    #[serde(default)]
    pub dominant: usize,
    #[serde(default)]
    pub utilization_samples: Option<Vec<f64>>,
    #[serde(default)]
    pub k_alpha: KAlpha,
    #[serde(default)]
    pub t_test: TTestForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassesSummary {
    pub class_utilizations: Vec<f64>,
    pub rho_a: f64,
    pub domination_factor: f64,
    pub rho_ap: f64,
    pub effective_mean: f64,
    pub effective_variance: f64,
    /// Dominant-class wait with the other classes as setups; `None` when
    /// the pool is saturated or a variance is missing.
    pub mg1_wait: Option<f64>,
    pub report: Option<ApproximationReport>,
}

pub fn summarize(file: &ClassesFile) -> Result<ClassesSummary, AnalyticsError> {
    let cs = &file.classes;
    let class_utilizations = cs.iter().map(class_utilization).collect::<Result<Vec<_>, _>>()?;
    let d = cs.get(file.dominant).ok_or(AnalyticsError::IndexOutOfRange {
        index: file.dominant,
        len: cs.len(),
    })?;
    let setups = setups_for(cs, file.dominant)?;
    let (effective_mean, effective_variance) =
        effective_process_time(d.service_mean, d.service_variance.unwrap_or(0.0), &setups)?;
    let variances_known = cs.iter().all(|c| c.service_variance.is_some());
    // Waits are for a single server; a pool of c is treated as one server
    // c times as fast.
    let c = f64::from(d.servers);
    let mg1 = variances_known
        .then(|| mg1_wait(d.arrival_rate, effective_mean / c, effective_variance / (c * c)).ok())
        .flatten();
    let report = match &file.utilization_samples {
        Some(values) => Some(approximation_report(
            cs,
            file.dominant,
            &UtilizationSample::from_values(values, file.k_alpha)?,
            file.t_test,
        )?),
        None => None,
    };
    Ok(ClassesSummary {
        rho_a: class_utilizations.iter().sum(),
        domination_factor: domination_factor(cs, file.dominant)?,
        rho_ap: rho_ap(cs, file.dominant)?,
        class_utilizations,
        effective_mean,
        effective_variance,
        mg1_wait: mg1,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn class(l: f64, m: f64, c: u32) -> JobClassSpec {
        JobClassSpec::new("x", l, m, c)
    }

    #[test]
    fn class_utilization_examples() {
        assert_abs_diff_eq!(class_utilization(&class(0.25, 0.87, 2)).unwrap(), 0.10875, epsilon = 1e-12);
        assert_eq!(class_utilization(&class(0.0, 0.87, 2)).unwrap(), 0.0);
        assert_abs_diff_eq!(class_utilization(&class(0.5, 2.0, 1)).unwrap(), 1.0, epsilon = 1e-12);
        assert!(class_utilization(&class(0.5, 0.0, 1)).is_err());
    }

    #[test]
    fn domination_examples() {
        let cs = [class(0.09, 1.0, 1), class(0.01, 1.0, 1)];
        assert_abs_diff_eq!(domination_factor(&cs, 0).unwrap(), 0.9, epsilon = 1e-12);
        assert_eq!(domination_factor(&cs[..1], 0).unwrap(), 1.0);
        assert_eq!(
            domination_factor(&[class(0.0, 1.0, 1)], 0),
            Err(AnalyticsError::AllZeroUtilization)
        );
    }

    #[test]
    fn c1_bound_collapses_for_wide_samples() {
        let s = UtilizationSample::new(0.1, 1.0, 100, 1.96).unwrap();
        assert!(theorem_c1_check(0.01, &s).unwrap());
        let zero = UtilizationSample::new(0.0, 0.1, 100, 1.96).unwrap();
        assert!(theorem_c1_check(0.5, &zero).is_err());
    }

    #[test]
    fn effective_time_by_substitution() {
        assert_eq!(effective_service_time(0.87, &[]).unwrap(), 0.87);
        let s = Setup {
            service_mean: 45.0,
            service_variance: 0.0,
            jobs_per_setup: 180.0,
        };
        assert_abs_diff_eq!(effective_service_time(0.87, &[s]).unwrap(), 1.12, epsilon = 1e-12);
        let bad = Setup { jobs_per_setup: 0.0, ..s };
        assert!(effective_service_time(0.87, &[bad]).is_err());
    }

    #[test]
    fn rho_ap_without_setups_is_rho_1() {
        let cs = [class(0.25, 0.87, 2), class(0.0, 20.0, 2)];
        assert_eq!(rho_ap(&cs, 0).unwrap(), class_utilization(&cs[0]).unwrap());
    }

    #[test]
    fn c2_interval_degenerates_at_r_zero() {
        let iv = theorem_c2_interval(0.1, 0.125, 0.0).unwrap();
        assert_eq!(iv.lo, iv.hi);
        assert!(iv.contains(0.8));
        assert!(theorem_c2_interval(0.1, 0.0, 0.1).is_err());
    }

    #[test]
    fn c2_interval_caps_at_one() {
        let iv = theorem_c2_interval(0.1, 0.1, 0.2).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.8, epsilon = 1e-12);
        assert_eq!(iv.hi, 1.0);
    }

    #[test]
    fn waiting_time_closed_forms() {
        assert_abs_diff_eq!(mg1_wait(0.5, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mg1_wait(0.5, 1.0, 0.0).unwrap(), 0.5, epsilon = 1e-12);
        assert!(mg1_wait(1.0, 1.0, 1.0).is_err());
        assert_abs_diff_eq!(
            kingman_wait(0.4, 1.0, 2.0, 1.5).unwrap(),
            mg1_wait(0.4, 2.0, 1.5).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn k_alpha_quantiles() {
        assert_abs_diff_eq!(KAlpha::default().value(100).unwrap(), 1.959964, epsilon = 1e-5);
        // t quantile with 9 dof
        assert_abs_diff_eq!(KAlpha::StudentT { alpha: 0.05 }.value(10).unwrap(), 2.262157, epsilon = 1e-5);
    }
}
