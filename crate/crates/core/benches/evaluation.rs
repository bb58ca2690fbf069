//! Fitness evaluation and forest training on a one-thread pool versus the
//! default rayon pool. Build with `--no-default-features` to measure the
//! sequential code path instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use fairga::classifier::{fit, ForestParams};
use fairga::evolve::{init_ramped, Evaluator, GAParams};
use fairga::synthetic::planted;
use fairga::FeatureMask;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = ThreadPoolBuilder::new().build().unwrap();
    let label = format!("default-pool-{}", default.current_num_threads());
    vec![
        (
            "1-thread".to_string(),
            ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
        ),
        (label, default),
    ]
}

fn population_evaluation(c: &mut Criterion) {
    let data = planted(400, 20, 7).unwrap();
    let g = GAParams::fast().with_seed(1);
    let fp = ForestParams::fast();
    let population = init_ramped(data.n_features(), &g, &mut fairga::rng::rng_from_seed(3));
    let mut group = c.benchmark_group("evaluate_population");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&label), |b| {
            b.iter(|| {
                pool.install(|| {
                    // A fresh evaluator each time, so nothing is served from cache.
                    let mut ev = Evaluator::for_run(&data, &g, &fp).unwrap();
                    let mut pop = population.clone();
                    ev.evaluate(&mut pop).unwrap();
                    pop
                })
            })
        });
    }
    group.finish();
}

fn forest_training(c: &mut Criterion) {
    let data = planted(1000, 20, 8).unwrap();
    let mask = FeatureMask::ones(20);
    let fp = ForestParams::default();
    let mut group = c.benchmark_group("fit_forest");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&label), |b| {
            b.iter(|| pool.install(|| fit(data.x(), data.y(), &mask, &fp).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, population_evaluation, forest_training);
criterion_main!(benches);
