//! Daily opening windows.

use serde::{Deserialize, Serialize};

use super::KernelError;

pub const MINUTES_PER_DAY: f64 = 1440.0;

/// A window `[open_minute, close_minute)` repeated every day.
///
/// With `overtime` set, work that was accepted before close runs to
/// completion past close; the window only gates new work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailySchedule {
    pub open_minute: f64,
    pub close_minute: f64,
    pub overtime: bool,
}

impl DailySchedule {
    pub fn new(open_minute: f64, close_minute: f64, overtime: bool) -> Result<Self, KernelError> {
        if !(0.0..=MINUTES_PER_DAY).contains(&open_minute)
            || !(0.0..=MINUTES_PER_DAY).contains(&close_minute)
            || open_minute >= close_minute
        {
            return Err(KernelError::InvalidSchedule {
                open: open_minute,
                close: close_minute,
            });
        }
        Ok(Self {
            open_minute,
            close_minute,
            overtime,
        })
    }

    pub fn around_the_clock() -> Self {
        Self {
            open_minute: 0.0,
            close_minute: MINUTES_PER_DAY,
            overtime: false,
        }
    }

    pub fn window_minutes(&self) -> f64 {
        self.close_minute - self.open_minute
    }

    pub fn minute_of_day(t: f64) -> f64 {
        t.rem_euclid(MINUTES_PER_DAY)
    }

    pub fn day_of(t: f64) -> u64 {
        (t / MINUTES_PER_DAY).floor() as u64
    }

    pub fn is_open(&self, t: f64) -> bool {
        let m = Self::minute_of_day(t);
        m >= self.open_minute && m < self.close_minute
    }

    /// Calendar time of the `offset`-th open minute counted from day 0.
    pub fn open_time_to_calendar(&self, offset: f64) -> f64 {
        let w = self.window_minutes();
        let day = (offset / w).floor();
        day * MINUTES_PER_DAY + self.open_minute + (offset - day * w)
    }

    /// Scheduled minutes in `[from, to)`.
    pub fn scheduled_minutes(&self, from: f64, to: f64) -> f64 {
        if to <= from {
            return 0.0;
        }
        let open_before = |t: f64| {
            let day = (t / MINUTES_PER_DAY).floor();
            let m = t - day * MINUTES_PER_DAY;
            day * self.window_minutes() + (m.clamp(self.open_minute, self.close_minute) - self.open_minute)
        };
        open_before(to) - open_before(from)
    }

    /// Start of the window on `day`.
    pub fn opening(&self, day: u64) -> f64 {
        day as f64 * MINUTES_PER_DAY + self.open_minute
    }
}
