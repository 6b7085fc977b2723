//! Property tests for the closed-form utilization and waiting-time results.

use proptest::prelude::*;

use phc_core::analytics::{
    additive_utilization, class_utilization, domination_factor, effective_process_time, kingman_wait,
    mg1_wait, one_sample_t, rho_ap, setups_for, theorem_c1_check, theorem_c2_interval, JobClassSpec,
    TTestForm, UtilizationSample,
};

fn class() -> impl Strategy<Value = (f64, f64, f64)> {
    // (arrival rate per minute, mean, variance)
    (0.001f64..0.2, 0.5f64..60.0, 0.0f64..100.0)
}

fn pool(servers: u32, raw: &[(f64, f64, f64)]) -> Vec<JobClassSpec> {
    raw.iter()
        .enumerate()
        .map(|(i, &(l, m, v))| JobClassSpec::new(format!("c{i}"), l, m, servers).with_variance(v))
        .collect()
}

proptest! {
    #[test]
    fn setup_inflated_utilization_sits_between_dominant_and_additive(
        servers in 1u32..5,
        raw in prop::collection::vec(class(), 1..6),
        dominant in 0usize..6,
    ) {
        let cs = pool(servers, &raw);
        let dominant = dominant % cs.len();
        let rho_1 = class_utilization(&cs[dominant]).unwrap();
        let rho_a = additive_utilization(&cs).unwrap();
        let ap = rho_ap(&cs, dominant).unwrap();
        let tol = 1e-12 * rho_a.max(1.0);
        prop_assert!(rho_1 <= ap + tol);
        prop_assert!(ap <= rho_a + tol);
        // On a shared pool, spreading every other class's work over the
        // dominant arrivals leaves the total work rate unchanged.
        let direct: f64 = raw.iter().map(|(l, m, _)| l * m).sum::<f64>() / servers as f64;
        prop_assert!((ap - direct).abs() < tol);
        prop_assert!((rho_a - direct).abs() < tol);
    }

    #[test]
    fn utilization_is_additive_and_scale_free(
        servers in 1u32..5,
        a in prop::collection::vec(class(), 1..4),
        b in prop::collection::vec(class(), 1..4),
        k in 0.1f64..10.0,
    ) {
        let all: Vec<_> = a.iter().chain(b.iter()).copied().collect();
        let sum = additive_utilization(&pool(servers, &a)).unwrap() + additive_utilization(&pool(servers, &b)).unwrap();
        let joint = additive_utilization(&pool(servers, &all)).unwrap();
        prop_assert!((joint - sum).abs() < 1e-12 * joint.max(1.0));
        // Faster arrivals with proportionally shorter services carry the
        // same load.
        let rescaled: Vec<_> = all.iter().map(|&(l, m, v)| (l * k, m / k, v)).collect();
        let r = additive_utilization(&pool(servers, &rescaled)).unwrap();
        prop_assert!((r - joint).abs() < 1e-9 * joint.max(1.0));
    }

    #[test]
    fn domination_factors_form_a_distribution(raw in prop::collection::vec(class(), 1..6)) {
        let cs = pool(1, &raw);
        let ds: Vec<f64> = (0..cs.len()).map(|i| domination_factor(&cs, i).unwrap()).collect();
        prop_assert!(ds.iter().all(|d| (0.0..=1.0).contains(d)));
        prop_assert!((ds.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn setup_variance_matches_bernoulli_mixture(
        base_mean in 0.5f64..20.0,
        base_var in 0.0f64..50.0,
        raw in prop::collection::vec(class(), 1..5),
        dominant_rate in 0.05f64..0.5,
    ) {
        let mut cs = vec![JobClassSpec::new("d", dominant_rate, base_mean, 1).with_variance(base_var)];
        cs.extend(pool(1, &raw));
        let setups = setups_for(&cs, 0).unwrap();
        let (mean, var) = effective_process_time(base_mean, base_var, &setups).unwrap();
        // Each dominant job carries setup j with probability p = rate_j / rate_d,
        // independently: a Bernoulli(p) times the setup duration.
        let mut m = base_mean;
        let mut v = base_var;
        for &(l, sm, sv) in &raw {
            let p = l / dominant_rate;
            let second = sv + sm * sm;
            m += p * sm;
            v += p * second - (p * sm).powi(2);
        }
        prop_assert!((mean - m).abs() < 1e-9 * m);
        prop_assert!((var - v).abs() < 1e-9 * v.max(1.0));
        // Order of the setups changes neither moment.
        let mut rev = setups.clone();
        rev.reverse();
        let (m2, v2) = effective_process_time(base_mean, base_var, &rev).unwrap();
        prop_assert!((m2 - mean).abs() < 1e-9 * mean && (v2 - var).abs() < 1e-9 * var.max(1.0));
    }

    #[test]
    fn t_test_is_antisymmetric_and_p_is_a_probability(
        xs in prop::collection::vec(0.0f64..1.0, 2..40),
        mu0 in 0.0f64..1.0,
    ) {
        prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-9));
        let mirrored: Vec<f64> = xs.iter().map(|x| 2.0 * mu0 - x).collect();
        for form in [TTestForm::StandardError, TTestForm::Spread] {
            let a = one_sample_t(&xs, mu0, form).unwrap();
            let b = one_sample_t(&mirrored, mu0, form).unwrap();
            prop_assert!((a.t + b.t).abs() < 1e-9 * a.t.abs().max(1.0));
            prop_assert!((a.p - b.p).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&a.p));
        }
        let se = one_sample_t(&xs, mu0, TTestForm::StandardError).unwrap();
        let sp = one_sample_t(&xs, mu0, TTestForm::Spread).unwrap();
        prop_assert!((se.t - sp.t * (xs.len() as f64).sqrt()).abs() < 1e-9 * se.t.abs().max(1.0));
        prop_assert!(sp.p >= se.p - 1e-12);
    }

    #[test]
    fn c1_condition_tracks_relative_half_width(
        rho in 0.05f64..1.0, s in 0.0f64..0.5, k in 0.0f64..3.0, d in 0.0f64..1.0, n in 2usize..200,
    ) {
        let sample = UtilizationSample::new(rho, s, n, k).unwrap();
        let r = k * s / rho;
        prop_assert_eq!(theorem_c1_check(d, &sample).unwrap(), d > 1.0 - r);
        // A dominant class carrying everything always passes unless r is 0.
        prop_assert_eq!(theorem_c1_check(1.0, &sample).unwrap(), r > 0.0);
    }

    #[test]
    fn c2_interval_is_ordered_and_capped(rho_1 in 0.0f64..1.0, extra in 0.0f64..1.0, r in 0.001f64..0.5) {
        let ap = rho_1 + extra + 1e-6;
        let iv = theorem_c2_interval(rho_1, ap, r).unwrap();
        prop_assert!(iv.lo <= iv.hi && iv.hi <= 1.0);
        let ratio = rho_1 / ap;
        prop_assert!((iv.lo - (1.0 - r) * ratio).abs() < 1e-12);
        if (1.0 + r) * ratio < 1.0 {
            prop_assert!(iv.contains(ratio));
        }
    }

    #[test]
    fn waits_are_monotone_and_agree_for_poisson_arrivals(
        rho in 0.01f64..0.95, mean in 0.5f64..30.0, scv in 0.0f64..3.0, extra in 0.01f64..2.0,
    ) {
        let lambda = rho / mean;
        let var = scv * mean * mean;
        let pk = mg1_wait(lambda, mean, var).unwrap();
        let kg = kingman_wait(lambda, 1.0, mean, var).unwrap();
        prop_assert!(pk >= 0.0);
        prop_assert!((pk - kg).abs() < 1e-9 * pk.max(1.0));
        prop_assert!(mg1_wait(lambda, mean, var + extra).unwrap() > pk);
        let busier = (rho + 0.5 * (1.0 - rho)) / mean;
        prop_assert!(mg1_wait(busier, mean, var).unwrap() >= pk);
        prop_assert!(mg1_wait(1.0001 / mean, mean, var).is_err());
    }
}
