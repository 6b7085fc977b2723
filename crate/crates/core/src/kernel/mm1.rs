//! Single-server queue with exponential interarrival and service times.
//!
//! Small enough to check against closed forms, so it serves as the kernel's
//! end-to-end self-test.

use serde::Serialize;

use super::{
    Acquire, Calendar, DistributionSpec, KernelError, Model, PriorityResource, RandomStream,
    SimEvent, Tally, Tier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mm1Action {
    Arrival,
    Departure(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mm1Outcome {
    pub utilization: f64,
    pub mean_wait: f64,
    pub mean_queue_len: f64,
    pub served: u64,
}

#[derive(Debug)]
pub struct Mm1 {
    interarrival: DistributionSpec,
    service: DistributionSpec,
    arrivals: RandomStream,
    services: RandomStream,
    server: PriorityResource<u64>,
    waits: Tally,
    next_id: u64,
    window_start: f64,
}

impl Mm1 {
    /// `arrival_rate` of zero gives a model that never sees a customer.
    pub fn new(arrival_rate: f64, service_rate: f64, seed: u64) -> Result<Self, KernelError> {
        let interarrival = if arrival_rate > 0.0 {
            DistributionSpec::exponential(1.0 / arrival_rate)
        } else {
            DistributionSpec::constant(f64::INFINITY)
        };
        let service = DistributionSpec::exponential(1.0 / service_rate);
        service.validate()?;
        Ok(Self {
            interarrival,
            service,
            arrivals: RandomStream::new(seed, "mm1.arrival"),
            services: RandomStream::new(seed, "mm1.service"),
            server: PriorityResource::new("server", 1)?,
            waits: Tally::new(),
            next_id: 0,
            window_start: 0.0,
        })
    }

    fn begin_service(&mut self, id: u64, cal: &mut Calendar<Mm1Action>) -> Result<(), KernelError> {
        let s = self.service.sample(&mut self.services);
        cal.schedule_in(s, Mm1Action::Departure(id))
    }

    fn schedule_arrival(&mut self, cal: &mut Calendar<Mm1Action>) -> Result<(), KernelError> {
        let gap = self.interarrival.sample(&mut self.arrivals);
        if gap.is_finite() {
            cal.schedule_in(gap, Mm1Action::Arrival)?;
        }
        Ok(())
    }
}

impl Model for Mm1 {
    type Action = Mm1Action;
    type Output = Mm1Outcome;
    type Error = KernelError;

    fn start(&mut self, cal: &mut Calendar<Mm1Action>) -> Result<(), KernelError> {
        self.schedule_arrival(cal)
    }

    fn handle(&mut self, ev: SimEvent<Mm1Action>, cal: &mut Calendar<Mm1Action>) -> Result<(), KernelError> {
        let now = ev.time;
        match ev.action {
            Mm1Action::Arrival => {
                let id = self.next_id;
                self.next_id += 1;
                if self.server.acquire(now, id, Tier::Low)? == Acquire::Granted {
                    self.waits.record(0.0);
                    self.begin_service(id, cal)?;
                }
                self.schedule_arrival(cal)?;
            }
            Mm1Action::Departure(id) => {
                if let Some(g) = self.server.release(now, id)? {
                    self.waits.record(g.waited);
                    self.begin_service(g.requester, cal)?;
                }
            }
        }
        Ok(())
    }

    fn reset_statistics(&mut self, now: f64) {
        self.server.reset_statistics(now);
        self.waits.reset();
        self.window_start = now;
    }

    fn finish(self, now: f64) -> Result<Mm1Outcome, KernelError> {
        Ok(Mm1Outcome {
            utilization: self.server.utilization(now, now - self.window_start)?,
            mean_wait: self.waits.mean(),
            mean_queue_len: self.server.mean_queue_len(now),
            served: self.waits.count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{run, Horizon};

    #[test]
    fn matches_closed_form() {
        // 10^6 observed minutes at lambda = 0.5, mu = 1.
        let days = 1.0e6 / 1440.0;
        let h = Horizon::new(days + 10.0, 10.0).unwrap();
        let out = run(Mm1::new(0.5, 1.0, 11).unwrap(), h).unwrap();
        let rho: f64 = 0.5;
        let wq = rho / (1.0 - 0.5);
        assert!((out.utilization - rho).abs() < 0.01, "{out:?}");
        assert!((out.mean_wait - wq).abs() < 0.05, "{out:?}");
    }

    #[test]
    fn zero_arrivals_stay_idle() {
        let out = run(Mm1::new(0.0, 1.0, 3).unwrap(), Horizon::new(5.0, 1.0).unwrap()).unwrap();
        assert_eq!(out.utilization, 0.0);
        assert_eq!(out.mean_wait, 0.0);
        assert_eq!(out.served, 0);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let h = Horizon::new(30.0, 5.0).unwrap();
        let a = run(Mm1::new(0.7, 1.0, 99).unwrap(), h).unwrap();
        let b = run(Mm1::new(0.7, 1.0, 99).unwrap(), h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn horizon_must_exceed_warmup() {
        assert!(Horizon::new(10.0, 10.0).is_err());
        assert!(Horizon::new(10.0, 0.0).is_err());
    }
}
