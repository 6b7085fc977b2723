use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phc_core::exec::{map_indexed, Execution};
use phc_core::kernel::{mm1::Mm1, run, Horizon};
use phc_core::model::{build_configuration, simulate, RunLength};

// Short runs keep a sample under a second while still giving each worker
// several replications.
const LENGTH: RunLength = RunLength {
    replications: 16,
    horizon_days: 60.0,
    warmup_days: 10.0,
};

fn phc_replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("phc_replications");
    group.sample_size(10);
    for id in [1u8, 4] {
        let cfg = build_configuration(id, &BTreeMap::new()).expect("reference configuration");
        for execution in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{execution:?}"), id), &cfg, |b, cfg| {
                b.iter(|| simulate(cfg, LENGTH, 1, execution).expect("simulation"))
            });
        }
    }
    group.finish();
}

fn mm1_replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("mm1_replications");
    let horizon = Horizon::new(30.0, 5.0).expect("horizon");
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{execution:?}"), |b| {
            b.iter(|| {
                map_indexed(execution, 32, |i| {
                    run(Mm1::new(0.5, 1.0, i as u64).expect("mm1"), horizon).expect("run")
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, phc_replications, mm1_replications);
criterion_main!(benches);
