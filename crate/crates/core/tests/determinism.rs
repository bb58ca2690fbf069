//! Results must not depend on the worker count.

use rayon::ThreadPoolBuilder;

use fairga::classifier::{fit, ForestParams};
use fairga::evolve::{run_lgaffs, GAParams};
use fairga::lexico::LexicoParams;
use fairga::pareto::run_pgaffs;
use fairga::synthetic::planted;
use fairga::FeatureMask;

fn on_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn forest_is_identical_across_pool_sizes() {
    let d = planted(300, 8, 1).unwrap();
    let mask = FeatureMask::ones(8);
    let fp = ForestParams::default().with_seed(42);
    let a = on_threads(1, || fit(d.x(), d.y(), &mask, &fp).unwrap());
    let b = on_threads(4, || fit(d.x(), d.y(), &mask, &fp).unwrap());
    assert_eq!(a, b);
}

#[test]
fn searches_are_identical_across_pool_sizes() {
    let d = planted(200, 10, 2).unwrap();
    let g = GAParams {
        population_size: 12,
        max_iterations: 3,
        seed: 8,
        ..GAParams::default()
    };
    let fp = ForestParams::fast();
    let lp = LexicoParams::default();
    let l1 = on_threads(1, || run_lgaffs(&d, &g, &lp, &fp).unwrap());
    let l4 = on_threads(4, || run_lgaffs(&d, &g, &lp, &fp).unwrap());
    assert_eq!(l1, l4);
    let p1 = on_threads(1, || run_pgaffs(&d, &g, &fp).unwrap());
    let p4 = on_threads(4, || run_pgaffs(&d, &g, &fp).unwrap());
    assert_eq!(p1, p4);
}
