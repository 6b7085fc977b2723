//! Service-time and interarrival distributions, in minutes.

use rand_distr::{Distribution, Exp, Normal, Triangular};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatNormal};

use super::rng::RandomStream;
use super::KernelError;

/// Below this acceptance probability a truncated normal is refused, since
/// rejection sampling would spin.
const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential { mean: f64 },
    /// Normal truncated from below by rejection.
    Normal { mean: f64, sd: f64, lower_bound: f64 },
    Uniform { min: f64, max: f64 },
    Triangular { low: f64, mode: f64, high: f64 },
    Constant { value: f64 },
}

impl DistributionSpec {
    pub fn exponential(mean: f64) -> Self {
        Self::Exponential { mean }
    }

    pub fn normal(mean: f64, sd: f64, lower_bound: f64) -> Self {
        Self::Normal {
            mean,
            sd,
            lower_bound,
        }
    }

    pub fn uniform(min: f64, max: f64) -> Self {
        Self::Uniform { min, max }
    }

    pub fn triangular(low: f64, mode: f64, high: f64) -> Self {
        Self::Triangular { low, mode, high }
    }

    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |reason: &str| Err(KernelError::InvalidDistribution(format!("{self:?}: {reason}")));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Self::Exponential { mean } => {
                if !finite(&[mean]) || mean <= 0.0 {
                    return bad("mean must be positive");
                }
            }
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => {
                if !finite(&[mean, sd, lower_bound]) {
                    return bad("parameters must be finite");
                }
                if mean <= 0.0 || sd <= 0.0 {
                    return bad("mean and sd must be positive");
                }
                if lower_bound < 0.0 {
                    return bad("lower bound must be nonnegative");
                }
                if self.acceptance_probability() < MIN_ACCEPTANCE {
                    return bad("lower bound leaves almost no mass");
                }
            }
            Self::Uniform { min, max } => {
                if !finite(&[min, max]) || min < 0.0 || min > max {
                    return bad("requires 0 <= min <= max");
                }
            }
            Self::Triangular { low, mode, high } => {
                if !finite(&[low, mode, high]) || low < 0.0 || !(low <= mode && mode <= high) {
                    return bad("requires 0 <= low <= mode <= high");
                }
            }
            Self::Constant { value } => {
                if !finite(&[value]) || value < 0.0 {
                    return bad("value must be nonnegative");
                }
            }
        }
        Ok(())
    }

    fn acceptance_probability(&self) -> f64 {
        match *self {
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => match StatNormal::new(mean, sd) {
                Ok(n) => n.sf(lower_bound),
                Err(_) => 0.0,
            },
            _ => 1.0,
        }
    }

    /// Draw one value. Parameters are assumed already validated.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            Self::Exponential { mean } => Exp::new(1.0 / mean)
                .expect("validated exponential")
                .sample(stream),
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => {
                let normal = Normal::new(mean, sd).expect("validated normal");
                loop {
                    let x = normal.sample(stream);
                    if x >= lower_bound {
                        return x;
                    }
                }
            }
            Self::Uniform { min, max } => min + (max - min) * stream.uniform01(),
            Self::Triangular { low, mode, high } => {
                if high > low {
                    Triangular::new(low, high, mode)
                        .expect("validated triangular")
                        .sample(stream)
                } else {
                    low
                }
            }
            Self::Constant { value } => value,
        }
    }

    /// The location parameter as written (for the truncated normal, the
    /// untruncated mean).
    pub fn nominal_mean(&self) -> f64 {
        match *self {
            Self::Exponential { mean } | Self::Normal { mean, .. } => mean,
            Self::Uniform { min, max } => 0.5 * (min + max),
            Self::Triangular { low, mode, high } => (low + mode + high) / 3.0,
            Self::Constant { value } => value,
        }
    }

    /// Mean of the distribution actually sampled.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => {
                let (_, z, phi) = truncation_terms(mean, sd, lower_bound);
                mean + sd * phi / z
            }
            _ => self.nominal_mean(),
        }
    }

    /// Variance of the distribution actually sampled.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Exponential { mean } => mean * mean,
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => {
                let (a, z, phi) = truncation_terms(mean, sd, lower_bound);
                let lambda = phi / z;
                sd * sd * (1.0 + a * lambda - lambda * lambda)
            }
            Self::Uniform { min, max } => (max - min).powi(2) / 12.0,
            Self::Triangular { low, mode, high } => {
                (low * low + mode * mode + high * high - low * mode - low * high - mode * high)
                    / 18.0
            }
            Self::Constant { .. } => 0.0,
        }
    }

    /// Multiply every location and scale parameter by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Exponential { mean } => Self::Exponential {
                mean: mean * factor,
            },
            Self::Normal {
                mean,
                sd,
                lower_bound,
            } => Self::Normal {
                mean: mean * factor,
                sd: sd * factor,
                lower_bound: lower_bound * factor,
            },
            Self::Uniform { min, max } => Self::Uniform {
                min: min * factor,
                max: max * factor,
            },
            Self::Triangular { low, mode, high } => Self::Triangular {
                low: low * factor,
                mode: mode * factor,
                high: high * factor,
            },
            Self::Constant { value } => Self::Constant {
                value: value * factor,
            },
        }
    }
}

/// Standardised lower bound, survival mass and density at the bound.
fn truncation_terms(mean: f64, sd: f64, lower_bound: f64) -> (f64, f64, f64) {
    let std = StatNormal::new(0.0, 1.0).expect("standard normal");
    let a = (lower_bound - mean) / sd;
    (a, std.sf(a), std.pdf(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_degenerate() {
        let mut s = RandomStream::new(1, "c");
        let d = DistributionSpec::constant(2.08);
        assert!((0..10).all(|_| d.sample(&mut s) == 2.08));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistributionSpec::exponential(0.0).validate().is_err());
        assert!(DistributionSpec::normal(1.0, -0.2, 0.0).validate().is_err());
        assert!(DistributionSpec::normal(-1.0, 0.2, 0.0).validate().is_err());
        assert!(DistributionSpec::uniform(5.0, 2.0).validate().is_err());
        assert!(DistributionSpec::triangular(60.0, 400.0, 360.0).validate().is_err());
        assert!(DistributionSpec::normal(1.0, 0.1, 3.0).validate().is_err());
        assert!(DistributionSpec::uniform(2.0, 2.0).validate().is_ok());
        assert!(DistributionSpec::triangular(60.0, 180.0, 360.0).validate().is_ok());
    }

    #[test]
    fn uniform_mean() {
        let mut s = RandomStream::new(9, "u");
        let d = DistributionSpec::uniform(120.0, 240.0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut s)).sum::<f64>() / n as f64;
        assert!((mean - 180.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn scaling_keeps_shape() {
        let d = DistributionSpec::normal(0.87, 0.21, 0.5).scaled(2.0);
        assert_eq!(d, DistributionSpec::normal(1.74, 0.42, 1.0));
    }
}
