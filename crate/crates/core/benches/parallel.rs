use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use peskin::constants::k_curve;
use peskin::evolution::velocity_on_curve_with;
use peskin::exec::Exec;
use peskin::force::{s_matrix, solve_force, PhysicsParams, SolverOptions};
use peskin::multiplier::{lemma_batch, random_queries};
use peskin::spectral::{perturbed_circle, FourierCurve};

fn strategies() -> Vec<(&'static str, Exec)> {
    let mut v = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Exec::Parallel));
    v
}

fn curve(m: usize) -> FourierCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    perturbed_circle(&mut rng, 0.02, 2, 5, m, 4 * m).unwrap()
}

fn bench_s_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("s_matrix");
    for m in [32, 64] {
        let x = curve(m);
        for (name, exec) in strategies() {
            let opts = SolverOptions { exec, ..SolverOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, 4 * m), &x, |b, x| b.iter(|| s_matrix(x, &opts).unwrap()));
        }
    }
    group.finish();
}

fn bench_velocity(c: &mut Criterion) {
    let mut group = c.benchmark_group("velocity_on_curve");
    let p = PhysicsParams::from_reduced(0.5, 1.0).unwrap();
    for m in [32, 64] {
        let x = curve(m);
        let f = solve_force(&x, &p).unwrap();
        for (name, exec) in strategies() {
            let opts = SolverOptions { exec, ..SolverOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, 4 * m), &x, |b, x| {
                b.iter(|| velocity_on_curve_with(x, &f, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_lemma(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_batch");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let queries = random_queries(&mut rng, 200, 3, 20);
    for (name, exec) in strategies() {
        group.bench_function(name, |b| b.iter(|| lemma_batch(&queries, exec).unwrap()));
    }
    group.finish();
}

fn bench_kcurve(c: &mut Criterion) {
    let mut group = c.benchmark_group("k_curve");
    for (name, exec) in strategies() {
        group.bench_function(name, |b| b.iter(|| k_curve(-0.95, 0.95, 200, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_s_matrix, bench_velocity, bench_lemma, bench_kcurve);
criterion_main!(benches);
