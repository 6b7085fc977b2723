//! Invariants of the facility model that must hold in every replication.

use std::collections::BTreeMap;

use proptest::prelude::*;

use phc_core::exec::Execution;
use phc_core::kernel::replication_seed;
use phc_core::model::{build_configuration, run_replication, simulate, FlowCount, Metric, RunLength};

const SHORT: RunLength = RunLength {
    replications: 3,
    horizon_days: 40.0,
    warmup_days: 5.0,
};

fn overrides(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect()
}

fn conserved(f: &FlowCount) -> bool {
    f.arrived == f.completed + f.referred + f.in_system
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn replications_respect_flow_and_referral_invariants(
        id in 1u8..=4,
        seed in any::<u64>(),
        consult in 0.5f64..6.0,
        opd_iat in 3.0f64..10.0,
        births in 0.5f64..3.0,
    ) {
        let mut o = vec![("consult_mean", consult), ("opd_iat", opd_iat)];
        if id != 3 {
            o.push(("childbirth_per_day", births));
        }
        let cfg = build_configuration(id, &overrides(&o)).unwrap();
        let run = run_replication(&cfg, seed, SHORT.horizon().unwrap(), false).unwrap();
        let out = &run.outcome;
        let d = &out.diagnostics;
        for f in [&d.flow.outpatient, &d.flow.inpatient, &d.flow.childbirth, &d.flow.anc] {
            prop_assert!(conserved(f), "{f:?}");
        }
        // Only childbirth patients are ever referred out.
        prop_assert_eq!(d.flow.outpatient.referred, 0);
        prop_assert_eq!(d.flow.inpatient.referred, 0);
        prop_assert!(d.max_admitted_labour_wait <= cfg.referral_threshold + 1e-9);
        if let Some(w) = d.min_referred_labour_wait {
            prop_assert!(w >= cfg.referral_threshold - 1e-9);
        }
        prop_assert_eq!(d.out_of_window_starts, 0);
        if let Some(r) = out.referral_fraction {
            prop_assert!((0.0..=1.0).contains(&r));
        }
        for m in Metric::ALL {
            if let Some(v) = out.get(m) {
                prop_assert!(v.is_finite() && v >= 0.0, "{m:?} = {v}");
            }
        }
        // Beds are available around the clock, so they cannot run over 100%.
        prop_assert!(out.inpatient_bed_utilization <= 1.0 + 1e-9);
        if let Some(u) = out.labour_bed_utilization {
            prop_assert!(u <= 1.0 + 1e-9);
        }
        prop_assert!((d.doctor_busy_minutes - d.doctor_sampled_minutes).abs() <= 0.02 * d.doctor_busy_minutes + 1e-6,
            "{} vs {}", d.doctor_busy_minutes, d.doctor_sampled_minutes);
    }

    #[test]
    fn execution_strategy_does_not_change_results(id in 1u8..=4, seed in any::<u64>()) {
        let cfg = build_configuration(id, &BTreeMap::new()).unwrap();
        let seq = simulate(&cfg, SHORT, seed, Execution::Sequential).unwrap();
        let par = simulate(&cfg, SHORT, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        let again = run_replication(&cfg, replication_seed(seed, 1), SHORT.horizon().unwrap(), false).unwrap();
        prop_assert_eq!(&seq.replications[1], &again.outcome);
    }

    #[test]
    fn longer_consults_keep_doctors_busier(id in 1u8..=4, seed in any::<u64>(), base in 0.8f64..2.0) {
        // Same seed, same arrivals: only the consult draws are stretched.
        let run = |c: f64| {
            let cfg = build_configuration(id, &overrides(&[("consult_mean", c)])).unwrap();
            simulate(&cfg, SHORT, seed, Execution::default()).unwrap()
        };
        let short = run(base);
        let long = run(2.5 * base);
        prop_assert!(long.mean(Metric::DoctorUtilization).unwrap() > short.mean(Metric::DoctorUtilization).unwrap());
        prop_assert_eq!(short.mean(Metric::OutpatientVisitsPerDay), long.mean(Metric::OutpatientVisitsPerDay));
    }
}

#[test]
fn visit_rate_matches_configured_load() {
    let length = RunLength {
        replications: 8,
        horizon_days: 200.0,
        warmup_days: 20.0,
    };
    for id in 1..=4 {
        let cfg = build_configuration(id, &BTreeMap::new()).unwrap();
        let report = simulate(&cfg, length, 5, Execution::default()).unwrap();
        let simulated = report.mean(Metric::OutpatientVisitsPerDay).unwrap();
        let expected = cfg.expected_visits_per_day();
        assert!(
            (simulated - expected).abs() < 0.03 * expected,
            "config {id}: {simulated} visits/day vs {expected}"
        );
    }
}
