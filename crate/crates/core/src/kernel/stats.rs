//! Statistics accumulators.

use serde::{Deserialize, Serialize};

/// Integral of a piecewise-constant signal over time.
#[derive(Debug, Clone, Default)]
pub struct TimeWeighted {
    value: f64,
    integral: f64,
    start: f64,
    last: f64,
}

impl TimeWeighted {
    pub fn new(start: f64) -> Self {
        Self {
            value: 0.0,
            integral: 0.0,
            start,
            last: start,
        }
    }

    fn advance(&mut self, now: f64) {
        debug_assert!(now >= self.last, "time went backwards: {now} < {}", self.last);
        self.integral += self.value * (now - self.last);
        self.last = now;
    }

    /// Record that the signal takes `value` from `now` onward.
    pub fn set(&mut self, now: f64, value: f64) {
        self.advance(now);
        self.value = value;
    }

    pub fn add(&mut self, now: f64, delta: f64) {
        let v = self.value + delta;
        self.set(now, v);
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Integral from the last reset up to `now`.
    pub fn integral(&self, now: f64) -> f64 {
        self.integral + self.value * (now - self.last)
    }

    /// Time average from the last reset up to `now`.
    pub fn mean(&self, now: f64) -> f64 {
        let span = now - self.start;
        if span > 0.0 {
            self.integral(now) / span
        } else {
            0.0
        }
    }

    /// Discard history before `now`, keeping the current level.
    pub fn reset(&mut self, now: f64) {
        self.advance(now);
        self.integral = 0.0;
        self.start = now;
    }
}

/// Running sample moments (Welford).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean, zero when empty.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n - 1 denominator), zero below two
    /// observations.
    pub fn sd(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

impl FromIterator<f64> for Tally {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut t = Tally::new();
        for x in iter {
            t.record(x);
        }
        t
    }
}
