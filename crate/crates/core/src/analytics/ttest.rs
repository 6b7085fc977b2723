//! One-sample t tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalyticsError;
use crate::kernel::Tally;

/// Denominator of the test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestForm {
    /// `(mean - mu0) / (s / sqrt(n))`: is the expected value `mu0`?
    #[default]
    StandardError,
    /// `(mean - mu0) / s`: does `mu0` sit inside the spread of single
    /// replications? Each replication is one draw of the utilization, so
    /// this asks whether a fresh run would plausibly report `mu0`.
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
    pub mean: f64,
    pub sd: f64,
}

pub fn one_sample_t(values: &[f64], mu0: f64, form: TTestForm) -> Result<TTest, AnalyticsError> {
    let tally: Tally = values.iter().copied().collect();
    t_from_summary(tally.mean(), tally.sd(), values.len(), mu0, form)
}

pub fn t_from_summary(mean: f64, sd: f64, n: usize, mu0: f64, form: TTestForm) -> Result<TTest, AnalyticsError> {
    if n < 2 {
        return Err(AnalyticsError::TooFewObservations(n));
    }
    if !(sd > 0.0) {
        return Err(AnalyticsError::ZeroVariance);
    }
    let scale = match form {
        TTestForm::StandardError => sd / (n as f64).sqrt(),
        TTestForm::Spread => sd,
    };
    let df = (n - 1) as f64;
    let t = (mean - mu0) / scale;
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive dof");
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(TTest { t, p, df, mean, sd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_sample_centred() {
        let r = one_sample_t(&[1.0, 2.0, 3.0], 2.0, TTestForm::StandardError).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn known_statistic() {
        // mean 3, sd sqrt(2.5), n 5 against 1: t = 2 / (1.5811 / 2.2361)
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = one_sample_t(&xs, 1.0, TTestForm::StandardError).unwrap();
        assert_abs_diff_eq!(r.t, 2.0 / (2.5f64.sqrt() / 5f64.sqrt()), epsilon = 1e-12);
        // two-sided p for t = 2.8284 on 4 dof
        assert_abs_diff_eq!(r.p, 0.04742, epsilon = 1e-4);
        let s = one_sample_t(&xs, 1.0, TTestForm::Spread).unwrap();
        assert_abs_diff_eq!(s.t * 5f64.sqrt(), r.t, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_samples_rejected() {
        assert_eq!(
            one_sample_t(&[2.0, 2.0], 1.0, TTestForm::Spread),
            Err(AnalyticsError::ZeroVariance)
        );
        assert_eq!(
            one_sample_t(&[2.0], 1.0, TTestForm::Spread),
            Err(AnalyticsError::TooFewObservations(1))
        );
    }
}
