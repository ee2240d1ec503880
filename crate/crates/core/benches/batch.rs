use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gridrv::batch::run_sequential;
use gridrv::grid::Node;
use gridrv::simulator::{RunOptions, Scenario, StrategySpec};
use gridrv::Count;

// Without fast-forward every move is stepped, so each scenario does real work.
const NAIVE: RunOptions = RunOptions { fast_forward: false };

fn scenarios(n: u64) -> Vec<Scenario> {
    (0..n)
        .map(|i| Scenario {
            label_a: i % 5,
            label_b: i % 5 + 1 + i % 3,
            offset: Node::new(1 + (i % 4) as i64, (i % 3) as i64 - 1),
            strategy: StrategySpec::random(i),
            budget: Count::from(200_000u32),
            stop_bound: None,
        })
        .collect()
}

fn batch(c: &mut Criterion) {
    let mut g = c.benchmark_group("batch");
    g.sample_size(10);
    for n in [8u64, 32] {
        let set = scenarios(n);
        g.bench_with_input(BenchmarkId::new("sequential", n), &set, |b, s| {
            b.iter(|| run_sequential(black_box(s), NAIVE))
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("parallel", n), &set, |b, s| {
            b.iter(|| gridrv::batch::run_parallel(black_box(s), NAIVE))
        });
    }
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
