//! Discrete-event simulation core with no clinic-specific logic.
//!
//! A [`Model`] owns its state, streams and resources. [`run`] drives it from
//! the calendar, resets its statistics once at the end of warm-up and hands
//! back whatever the model reports at the horizon.

mod calendar;
mod dist;
pub mod mm1;
mod resource;
mod rng;
mod schedule;
mod stats;

pub use calendar::{Calendar, SimEvent};
pub use dist::DistributionSpec;
pub use resource::{Acquire, Grant, PriorityResource, Tier};
pub use rng::{mix64, replication_seed, RandomStream};
pub use schedule::{DailySchedule, MINUTES_PER_DAY};
pub use stats::{Tally, TimeWeighted};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("event scheduled at {requested} but the clock is already at {now}")]
    ScheduleInPast { requested: f64, now: f64 },
    #[error("event time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("invalid distribution {0}")]
    InvalidDistribution(String),
    #[error("invalid daily window {open}..{close}")]
    InvalidSchedule { open: f64, close: f64 },
    #[error("resource `{0}` needs at least one server")]
    ZeroCapacity(String),
    #[error("resource `{0}` has no scheduled time in the horizon")]
    NoScheduledTime(String),
    #[error("{requester} already holds or waits for `{resource}`")]
    DuplicateRequest { resource: String, requester: String },
    #[error("{requester} does not hold `{resource}`")]
    NotHolding { resource: String, requester: String },
    #[error("horizon of {horizon_days} days must exceed warm-up of {warmup_days} days, both positive")]
    InvalidHorizon { horizon_days: f64, warmup_days: f64 },
}

/// Run length in days. Statistics cover `(warmup_days, horizon_days]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub horizon_days: f64,
    pub warmup_days: f64,
}

impl Horizon {
    pub fn new(horizon_days: f64, warmup_days: f64) -> Result<Self, KernelError> {
        if !(warmup_days > 0.0 && horizon_days > warmup_days && horizon_days.is_finite()) {
            return Err(KernelError::InvalidHorizon {
                horizon_days,
                warmup_days,
            });
        }
        Ok(Self {
            horizon_days,
            warmup_days,
        })
    }

    pub fn warmup_end(&self) -> f64 {
        self.warmup_days * MINUTES_PER_DAY
    }

    pub fn end(&self) -> f64 {
        self.horizon_days * MINUTES_PER_DAY
    }

    pub fn observed_days(&self) -> f64 {
        self.horizon_days - self.warmup_days
    }
}

pub trait Model {
    type Action;
    type Output;
    type Error: From<KernelError>;

    /// Seed the calendar with the first events.
    fn start(&mut self, calendar: &mut Calendar<Self::Action>) -> Result<(), Self::Error>;

    fn handle(
        &mut self,
        event: SimEvent<Self::Action>,
        calendar: &mut Calendar<Self::Action>,
    ) -> Result<(), Self::Error>;

    /// Forget everything observed before `now`, keeping the current state.
    fn reset_statistics(&mut self, now: f64);

    fn finish(self, now: f64) -> Result<Self::Output, Self::Error>;
}

/// Drive `model` to the end of `horizon`. Events falling exactly on the end
/// time are not dispatched.
pub fn run<M: Model>(mut model: M, horizon: Horizon) -> Result<M::Output, M::Error> {
    let mut calendar = Calendar::new();
    model.start(&mut calendar)?;
    let warmup_end = horizon.warmup_end();
    let end = horizon.end();
    let mut warmed = false;

    loop {
        let next = calendar.peek_time().unwrap_or(f64::INFINITY);
        if !warmed && next >= warmup_end {
            calendar.advance_to(warmup_end);
            model.reset_statistics(warmup_end);
            warmed = true;
        }
        if next >= end {
            break;
        }
        let event = calendar.next_event().expect("peeked event exists");
        model.handle(event, &mut calendar)?;
    }
    calendar.advance_to(end);
    model.finish(end)
}
