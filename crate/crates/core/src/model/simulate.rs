//! Independent replications of one configuration.

use serde::{Deserialize, Serialize};

use super::outcome::OutcomeReport;
use super::phc::{PhcModel, PhcRun};
use super::{ModelError, PhcConfiguration};
use crate::exec::{map_indexed, Execution};
use crate::kernel::{replication_seed, run, Horizon};

/// Replication budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLength {
    pub replications: u32,
    pub horizon_days: f64,
    pub warmup_days: f64,
}

impl Default for RunLength {
    fn default() -> Self {
        Self {
            replications: 100,
            horizon_days: 365.0,
            warmup_days: 180.0,
        }
    }
}

impl RunLength {
    /// Short budget for smoke runs.
    pub fn fast() -> Self {
        Self {
            replications: 20,
            horizon_days: 185.0,
            warmup_days: 60.0,
        }
    }

    pub fn horizon(&self) -> Result<Horizon, ModelError> {
        Ok(Horizon::new(self.horizon_days, self.warmup_days)?)
    }
}

pub fn run_replication(cfg: &PhcConfiguration, seed: u64, horizon: Horizon, tracing: bool) -> Result<PhcRun, ModelError> {
    run(PhcModel::new(cfg, seed, horizon, tracing)?, horizon)
}

/// Run `length.replications` replications; replication `r` uses
/// `replication_seed(base_seed, r)`.
pub fn simulate(
    cfg: &PhcConfiguration,
    length: RunLength,
    base_seed: u64,
    execution: Execution,
) -> Result<OutcomeReport, ModelError> {
    if length.replications == 0 {
        return Err(ModelError::NoReplications);
    }
    cfg.validate()?;
    let horizon = length.horizon()?;
    let runs = map_indexed(execution, length.replications as usize, |r| {
        run_replication(cfg, replication_seed(base_seed, r as u32), horizon, false).map(|run| run.outcome)
    });
    Ok(OutcomeReport::new(base_seed, runs.into_iter().collect::<Result<_, _>>()?))
}
