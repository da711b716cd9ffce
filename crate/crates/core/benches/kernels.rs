use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use affine_mixer::algebra::IntMatrix;
use affine_mixer::digitlab::block_census;
use affine_mixer::evolution::{ChainSpec, Evolver, DEFAULT_STATE_CAP};
use affine_mixer::fourier::upper_bound_with;
use affine_mixer::increments::IncrementDistribution;
use affine_mixer::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn chain(p: u64) -> ChainSpec {
    let a = IntMatrix::from_rows(&[&[2, 1], &[1, 1]]).unwrap();
    let mu = IncrementDistribution::uniform(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
    ChainSpec::new(a, mu, p).unwrap()
}

fn step(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    for p in [101u64, 401, 1009] {
        let ch = chain(p);
        for (name, exec) in MODES {
            let ev = Evolver::new(&ch, DEFAULT_STATE_CAP, exec).unwrap();
            let d = ev.run(&ch, 3, |_, _| {});
            g.bench_with_input(BenchmarkId::new(name, p), &d, |b, d| b.iter(|| ev.step(black_box(d))));
        }
    }
    g.finish();
}

fn upper(c: &mut Criterion) {
    let mut g = c.benchmark_group("upper_bound");
    for p in [101u64, 401] {
        let ch = chain(p);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, p), &ch, |b, ch| {
                b.iter(|| upper_bound_with(black_box(ch), 20, DEFAULT_STATE_CAP, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    for p in [10_007u64, 100_003] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, p), &p, |b, &p| {
                b.iter(|| block_census(black_box(p), 2, 18, 2, exec).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = step, upper, census
}
criterion_main!(benches);
