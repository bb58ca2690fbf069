//! Seeded synthetic datasets with a known answer.

use rand::Rng;

use crate::data::{Dataset, FeatureMatrix};
use crate::error::Result;
use crate::rng::rng_from_seed;

/// Planted problem: feature 0 is uniform on [0, 1] and `y = 1` iff it
/// exceeds 0.5; the group label and the other `n_features - 1` columns are
/// independent uniform noise. Selecting feature 0 alone gives a perfect,
/// group-blind classifier.
pub fn planted(n: usize, n_features: usize, seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let mut data = Vec::with_capacity(n * n_features);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let signal: f64 = rng.gen();
        y.push(u8::from(signal > 0.5));
        s.push(u8::from(rng.gen_bool(0.5)));
        data.push(signal);
        data.extend((1..n_features).map(|_| rng.gen::<f64>()));
    }
    let names = (0..n_features)
        .map(|j| {
            if j == 0 {
                "signal".to_string()
            } else {
                format!("noise{j}")
            }
        })
        .collect();
    Dataset::new(FeatureMatrix::new(n, n_features, data)?, y, s, names)
}
