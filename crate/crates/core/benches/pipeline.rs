//! Sequential vs parallel detection and the full pipeline on the committed
//! fixture bundles.

use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rlf_core::config::RunConfig;
use rlf_core::detection::detect_with;
use rlf_core::par::Execution;
use rlf_core::pipeline::run;
use rlf_core::snapshot::load_bundle;

fn bench(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut group = c.benchmark_group("detect");
    for name in ["we_row", "case_study"] {
        let bundle = load_bundle(root.join(name)).expect("fixture bundle");
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, name), &bundle, |b, bundle| {
                b.iter(|| detect_with(bundle, &cfg.detect(), exec))
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("pipeline");
    let bundle = load_bundle(root.join("case_study")).expect("fixture bundle");
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(label, |b| b.iter(|| run(&bundle, &cfg, exec)));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench
}
criterion_main!(benches);
