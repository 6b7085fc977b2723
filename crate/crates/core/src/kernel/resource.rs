//! Capacity-limited server pool with a nonpreemptive priority queue.
//!
//! Waiters are kept in one FIFO per tier. A release hands the freed server to
//! the head of the highest nonempty tier; work in progress is never
//! interrupted. The background tier holds filler work (administration) that
//! should only run when no patient is waiting, and it is left out of the
//! queue-length statistic.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::stats::TimeWeighted;
use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    High,
    Low,
    Background,
}

impl Tier {
    const ALL: [Tier; 3] = [Tier::High, Tier::Low, Tier::Background];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acquire {
    Granted,
    /// Zero-based position in the overall service order.
    Queued { position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grant<R> {
    pub requester: R,
    pub tier: Tier,
    pub waited: f64,
}

#[derive(Debug, Clone)]
struct Waiter<R> {
    requester: R,
    since: f64,
}

#[derive(Debug, Clone)]
pub struct PriorityResource<R> {
    name: String,
    capacity: u32,
    holders: Vec<R>,
    queues: [VecDeque<Waiter<R>>; 3],
    busy: TimeWeighted,
    waiting: TimeWeighted,
    granted: u64,
    released: u64,
}

impl<R: Copy + PartialEq + std::fmt::Debug> PriorityResource<R> {
    pub fn new(name: impl Into<String>, capacity: u32) -> Result<Self, KernelError> {
        let name = name.into();
        if capacity == 0 {
            return Err(KernelError::ZeroCapacity(name));
        }
        Ok(Self {
            name,
            capacity,
            holders: Vec::with_capacity(capacity as usize),
            queues: Default::default(),
            busy: TimeWeighted::new(0.0),
            waiting: TimeWeighted::new(0.0),
            granted: 0,
            released: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn in_service(&self) -> usize {
        self.holders.len()
    }

    pub fn is_holding(&self, requester: R) -> bool {
        self.holders.contains(&requester)
    }

    pub fn is_waiting(&self, requester: R) -> bool {
        self.queues
            .iter()
            .any(|q| q.iter().any(|w| w.requester == requester))
    }

    /// Waiters in the patient tiers.
    pub fn queue_len(&self) -> usize {
        self.queues[Tier::High.index()].len() + self.queues[Tier::Low.index()].len()
    }

    pub fn waiting_in(&self, tier: Tier) -> usize {
        self.queues[tier.index()].len()
    }

    pub fn granted(&self) -> u64 {
        self.granted
    }

    pub fn released(&self) -> u64 {
        self.released
    }

    pub fn acquire(&mut self, now: f64, requester: R, tier: Tier) -> Result<Acquire, KernelError> {
        if self.is_holding(requester) || self.is_waiting(requester) {
            return Err(KernelError::DuplicateRequest {
                resource: self.name.clone(),
                requester: format!("{requester:?}"),
            });
        }
        if self.holders.len() < self.capacity as usize {
            debug_assert!(self.queues.iter().all(VecDeque::is_empty));
            self.grant(now, requester);
            return Ok(Acquire::Granted);
        }
        let ahead: usize = Tier::ALL
            .iter()
            .take_while(|t| **t <= tier)
            .map(|t| self.queues[t.index()].len())
            .sum();
        self.queues[tier.index()].push_back(Waiter {
            requester,
            since: now,
        });
        self.refresh_waiting(now);
        Ok(Acquire::Queued { position: ahead })
    }

    /// Free the server held by `requester` and hand it to the next waiter,
    /// if any.
    pub fn release(&mut self, now: f64, requester: R) -> Result<Option<Grant<R>>, KernelError> {
        let idx = self
            .holders
            .iter()
            .position(|h| *h == requester)
            .ok_or_else(|| KernelError::NotHolding {
                resource: self.name.clone(),
                requester: format!("{requester:?}"),
            })?;
        self.holders.swap_remove(idx);
        self.released += 1;
        self.busy.set(now, self.holders.len() as f64);

        for tier in Tier::ALL {
            if let Some(w) = self.queues[tier.index()].pop_front() {
                self.refresh_waiting(now);
                self.grant(now, w.requester);
                return Ok(Some(Grant {
                    requester: w.requester,
                    tier,
                    waited: now - w.since,
                }));
            }
        }
        Ok(None)
    }

    /// Withdraw a queued request. Returns how long it had waited, or `None`
    /// when the requester was not queued.
    pub fn cancel(&mut self, now: f64, requester: R) -> Option<f64> {
        for q in self.queues.iter_mut() {
            if let Some(idx) = q.iter().position(|w| w.requester == requester) {
                let w = q.remove(idx).expect("index from position");
                self.refresh_waiting(now);
                return Some(now - w.since);
            }
        }
        None
    }

    fn grant(&mut self, now: f64, requester: R) {
        self.holders.push(requester);
        self.granted += 1;
        self.busy.set(now, self.holders.len() as f64);
    }

    fn refresh_waiting(&mut self, now: f64) {
        let n = self.queue_len() as f64;
        if n != self.waiting.value() {
            self.waiting.set(now, n);
        }
    }

    /// Server-minutes spent busy since the last reset.
    pub fn busy_minutes(&self, now: f64) -> f64 {
        self.busy.integral(now)
    }

    /// Busy server-minutes divided by scheduled server-minutes. May exceed 1
    /// when work runs past the scheduled window.
    pub fn utilization(&self, now: f64, scheduled_minutes: f64) -> Result<f64, KernelError> {
        if scheduled_minutes <= 0.0 {
            return Err(KernelError::NoScheduledTime(self.name.clone()));
        }
        Ok(self.busy_minutes(now) / (self.capacity as f64 * scheduled_minutes))
    }

    /// Time-average number of patient-tier waiters since the last reset.
    pub fn mean_queue_len(&self, now: f64) -> f64 {
        self.waiting.mean(now)
    }

    pub fn reset_statistics(&mut self, now: f64) {
        self.busy.reset(now);
        self.waiting.reset(now);
    }
}
