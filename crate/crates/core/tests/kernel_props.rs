//! Property tests for the event calendar, priority resource, random streams
//! and distributions.

use std::collections::VecDeque;

use proptest::prelude::*;

use phc_core::kernel::mm1::Mm1;
use phc_core::kernel::{
    run, Acquire, Calendar, DistributionSpec, Horizon, PriorityResource, RandomStream, Tier,
};

fn tier() -> impl Strategy<Value = Tier> {
    prop_oneof![Just(Tier::High), Just(Tier::Low), Just(Tier::Background)]
}

#[derive(Debug, Clone)]
enum Op {
    Arrive(Tier),
    /// Release the holder at this index (modulo the number of holders).
    Release(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![tier().prop_map(Op::Arrive), any::<usize>().prop_map(Op::Release)]
}

/// Simpson's rule on [a, b] with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

proptest! {
    #[test]
    fn calendar_pops_in_time_then_insertion_order(times in prop::collection::vec(0u32..50, 1..200)) {
        let mut cal = Calendar::new();
        for (i, t) in times.iter().enumerate() {
            cal.schedule(*t as f64, i).unwrap();
        }
        let mut popped = Vec::new();
        while let Some(ev) = cal.next_event() {
            prop_assert_eq!(cal.now(), ev.time);
            popped.push((ev.time, ev.action));
        }
        let mut expected: Vec<(f64, usize)> = times.iter().enumerate().map(|(i, t)| (*t as f64, i)).collect();
        // Stable sort keeps insertion order among equal times.
        expected.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert_eq!(popped, expected);
    }

    #[test]
    fn calendar_never_goes_back_in_time(delays in prop::collection::vec(0.0f64..10.0, 1..100)) {
        let mut cal = Calendar::new();
        cal.schedule(0.0, 0usize).unwrap();
        let mut last = 0.0;
        let mut k = 0;
        while let Some(ev) = cal.next_event() {
            prop_assert!(ev.time >= last);
            last = ev.time;
            if k < delays.len() {
                cal.schedule_in(delays[k], k).unwrap();
                k += 1;
            }
            prop_assert!(cal.schedule(last - 1.0, 0).is_err());
        }
        prop_assert_eq!(k, delays.len());
    }

    #[test]
    fn resource_conserves_and_respects_priority(
        capacity in 1u32..4,
        ops in prop::collection::vec(op(), 1..300),
    ) {
        let mut res = PriorityResource::new("r", capacity).unwrap();
        // Reference model: holders plus one FIFO per tier.
        let mut holders: Vec<u64> = Vec::new();
        let mut queues: [VecDeque<u64>; 3] = Default::default();
        let mut next = 0u64;
        for (step, op) in ops.into_iter().enumerate() {
            let now = step as f64;
            match op {
                Op::Arrive(t) => {
                    let id = next;
                    next += 1;
                    match res.acquire(now, id, t).unwrap() {
                        Acquire::Granted => {
                            prop_assert!(holders.len() < capacity as usize);
                            holders.push(id);
                        }
                        Acquire::Queued { .. } => {
                            prop_assert_eq!(holders.len(), capacity as usize);
                            queues[t as usize].push_back(id);
                        }
                    }
                }
                Op::Release(k) => {
                    if holders.is_empty() {
                        continue;
                    }
                    let id = holders.swap_remove(k % holders.len());
                    let expected = queues.iter_mut().find(|q| !q.is_empty()).and_then(|q| q.pop_front());
                    let grant = res.release(now, id).unwrap();
                    prop_assert_eq!(grant.map(|g| g.requester), expected);
                    if let Some(g) = grant {
                        prop_assert!(g.waited >= 0.0);
                        holders.push(g.requester);
                    }
                }
            }
            prop_assert_eq!(res.in_service(), holders.len());
            prop_assert_eq!(res.granted() - res.released(), holders.len() as u64);
            for t in [Tier::High, Tier::Low, Tier::Background] {
                prop_assert_eq!(res.waiting_in(t), queues[t as usize].len());
            }
            // Work conservation: nobody waits while a server is idle.
            if queues.iter().any(|q| !q.is_empty()) {
                prop_assert_eq!(res.in_service(), capacity as usize);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_in_unit_interval(seed in any::<u64>(), label in "[a-z.]{1,12}") {
        let mut a = RandomStream::new(seed, &label);
        let mut b = RandomStream::new(seed, &label);
        for _ in 0..64 {
            let x = a.uniform01();
            prop_assert!((0.0..1.0).contains(&x));
            prop_assert_eq!(x, b.uniform01());
        }
    }

    #[test]
    fn samples_stay_in_support(seed in any::<u64>(), mean in 0.5f64..20.0, cv in 0.05f64..1.0, cut in 0.0f64..0.9) {
        let mut s = RandomStream::new(seed, "support");
        let normal = DistributionSpec::normal(mean, cv * mean, cut * mean);
        let uniform = DistributionSpec::uniform(cut * mean, mean);
        let tri = DistributionSpec::triangular(cut * mean, mean, 2.0 * mean);
        for _ in 0..200 {
            prop_assert!(normal.sample(&mut s) >= cut * mean);
            let u = uniform.sample(&mut s);
            prop_assert!(u >= cut * mean && u <= mean);
            let t = tri.sample(&mut s);
            prop_assert!(t >= cut * mean && t <= 2.0 * mean);
            prop_assert!(DistributionSpec::exponential(mean).sample(&mut s) >= 0.0);
        }
    }

    #[test]
    fn truncated_normal_moments_match_quadrature(mean in 0.5f64..10.0, cv in 0.1f64..1.5, cut in 0.0f64..1.2) {
        let sd = cv * mean;
        let lb = cut * mean;
        let d = DistributionSpec::normal(mean, sd, lb);
        let hi = mean + 12.0 * sd;
        let mass = simpson(|x| normal_pdf(x, mean, sd), lb, hi, 4000);
        let m1 = simpson(|x| x * normal_pdf(x, mean, sd), lb, hi, 4000) / mass;
        let m2 = simpson(|x| x * x * normal_pdf(x, mean, sd), lb, hi, 4000) / mass;
        prop_assert!((d.mean() - m1).abs() < 1e-6 * mean.max(1.0), "{} vs {}", d.mean(), m1);
        prop_assert!((d.variance() - (m2 - m1 * m1)).abs() < 1e-5 * sd * sd, "{} vs {}", d.variance(), m2 - m1 * m1);
    }

    #[test]
    fn scaling_scales_moments(mean in 0.5f64..10.0, cv in 0.1f64..1.0, f in 0.1f64..10.0) {
        let d = DistributionSpec::normal(mean, cv * mean, 0.3 * mean);
        let s = d.scaled(f);
        prop_assert!((s.mean() - f * d.mean()).abs() < 1e-9 * f * mean);
        prop_assert!((s.variance() - f * f * d.variance()).abs() < 1e-9 * f * f * mean * mean);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn mm1_obeys_littles_law_and_closed_forms(rho in 0.2f64..0.7, seed in any::<u64>()) {
        // 500 observed days at a one-minute mean service time.
        let h = Horizon::new(510.0, 10.0).unwrap();
        let out = run(Mm1::new(rho, 1.0, seed).unwrap(), h).unwrap();
        let observed = h.observed_days() * 1440.0;
        let throughput = out.served as f64 / observed;
        let little = throughput * out.mean_wait;
        prop_assert!((out.mean_queue_len - little).abs() < 0.02 + 0.03 * little, "{out:?} vs L = {little}");
        prop_assert!((out.utilization - rho).abs() < 0.02, "{out:?}");
        let wq = rho / (1.0 - rho);
        prop_assert!((out.mean_wait - wq).abs() < 0.1 * wq + 0.02, "{} vs {wq}", out.mean_wait);
    }

    #[test]
    fn kernel_runs_are_deterministic(seed in any::<u64>()) {
        let h = Horizon::new(20.0, 2.0).unwrap();
        let a = run(Mm1::new(0.6, 1.0, seed).unwrap(), h).unwrap();
        let b = run(Mm1::new(0.6, 1.0, seed).unwrap(), h).unwrap();
        prop_assert_eq!(a, b);
    }
}
