//! Future event list.
//!
//! Events are kept in a binary heap keyed by `(time, sequence)`. The sequence
//! number is a monotone insertion counter, so events scheduled for the same
//! instant come out in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::KernelError;

/// One scheduled event.
#[derive(Debug, Clone)]
pub struct SimEvent<A> {
    pub time: f64,
    pub sequence: u64,
    pub action: A,
}

impl<A> PartialEq for SimEvent<A> {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence
    }
}

impl<A> Eq for SimEvent<A> {}

impl<A> PartialOrd for SimEvent<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for SimEvent<A> {
    // Reversed so the max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

#[derive(Debug)]
pub struct Calendar<A> {
    heap: BinaryHeap<SimEvent<A>>,
    next_sequence: u64,
    now: f64,
}

impl<A> Default for Calendar<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Calendar<A> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_sequence: 0,
            now: 0.0,
        }
    }

    /// Current simulated time in minutes.
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Schedule `action` at absolute time `time`.
    ///
    /// Scheduling before the current clock is refused rather than silently
    /// moved forward.
    pub fn schedule(&mut self, time: f64, action: A) -> Result<(), KernelError> {
        if !time.is_finite() {
            return Err(KernelError::NonFiniteTime(time));
        }
        if time < self.now {
            return Err(KernelError::ScheduleInPast {
                requested: time,
                now: self.now,
            });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(SimEvent {
            time,
            sequence,
            action,
        });
        Ok(())
    }

    /// Schedule `action` after a nonnegative delay.
    pub fn schedule_in(&mut self, delay: f64, action: A) -> Result<(), KernelError> {
        self.schedule(self.now + delay, action)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    /// Pop the next event and advance the clock to it. `None` marks the end
    /// of the simulation.
    pub fn next_event(&mut self) -> Option<SimEvent<A>> {
        let event = self.heap.pop()?;
        self.now = event.time;
        Some(event)
    }

    /// Move the clock forward without dispatching anything.
    pub(crate) fn advance_to(&mut self, time: f64) {
        debug_assert!(time >= self.now);
        self.now = time;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(cal: &mut Calendar<&'static str>) -> Vec<(f64, &'static str)> {
        std::iter::from_fn(|| cal.next_event().map(|e| (e.time, e.action))).collect()
    }

    #[test]
    fn equal_times_dispatch_in_insertion_order() {
        let mut cal = Calendar::new();
        cal.schedule(5.0, "first").unwrap();
        cal.schedule(5.0, "second").unwrap();
        assert_eq!(drain(&mut cal), vec![(5.0, "first"), (5.0, "second")]);
    }

    #[test]
    fn dispatch_is_time_ordered() {
        let mut cal = Calendar::new();
        cal.schedule(3.0, "c").unwrap();
        cal.schedule(1.0, "a").unwrap();
        cal.schedule(2.0, "b").unwrap();
        assert_eq!(drain(&mut cal), vec![(1.0, "a"), (2.0, "b"), (3.0, "c")]);
    }

    #[test]
    fn empty_calendar_ends_simulation() {
        let mut cal: Calendar<()> = Calendar::new();
        assert!(cal.next_event().is_none());
    }

    #[test]
    fn scheduling_in_the_past_is_an_error() {
        let mut cal = Calendar::new();
        cal.schedule(10.0, ()).unwrap();
        cal.next_event().unwrap();
        let err = cal.schedule(9.0, ()).unwrap_err();
        assert!(matches!(err, KernelError::ScheduleInPast { .. }));
        assert!(cal.schedule(10.0, ()).is_ok());
    }
}
