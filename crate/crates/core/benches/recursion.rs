//! Sequential vs parallel execution of the recursion kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use etacert::bounds::{make_schedule, BoundRunState};
use etacert::exact::exact_sequence_with;
use etacert::par::Execution;
use rug::Rational;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_sequence_k4");
    g.sample_size(10);
    let alpha = Rational::from(4);
    for n in [1000u64, 3000] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| exact_sequence_with(&alpha, n, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("bounds_full_k4_256bit");
    g.sample_size(10);
    let alpha = Rational::from(4);
    for n in [5000u64, 20000] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| {
                    let mut s = BoundRunState::new(&alpha, make_schedule("full").unwrap(), 256, n)
                        .unwrap()
                        .with_execution(exec);
                    while s.current_n() < n {
                        s.step().unwrap();
                    }
                    s.integrity_hex()
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, exact, bounds);
criterion_main!(benches);
