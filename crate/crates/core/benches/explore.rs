use std::path::Path;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tsolive_core::dsl::parse_library;
use tsolive_core::explore::{explore_with, ExploreMode, ExploreOptions};
use tsolive_core::system::mgc_compose;
use tsolive_core::{BufferBound, MemoryModel, SystemSpec};

fn spec(name: &str, bound: usize) -> SystemSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../zoo").join(name);
    let lib = parse_library(&std::fs::read_to_string(path).unwrap()).unwrap();
    mgc_compose(Arc::new(lib), 2, MemoryModel::Tso, BufferBound::Bounded(bound)).unwrap()
}

fn bench_explore(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore");
    group.sample_size(10);
    for (name, bound) in [("sb.lib", 2), ("cas_counter.lib", 2), ("message_passing.lib", 2)] {
        let s = spec(name, bound);
        for mode in [ExploreMode::Sequential, ExploreMode::Parallel] {
            let opts = ExploreOptions { mode, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), name), &s, |b, s| {
                b.iter(|| explore_with(s, opts).unwrap().nodes.len())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_explore);
criterion_main!(benches);
