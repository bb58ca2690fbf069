//! Random forest wrapper classifier over a feature mask.
//!
//! CART trees with Gini-impurity splits on a per-node random subsample of the
//! selected features, trained on bootstrap resamples. Tree `t` draws from its
//! own RNG stream `derive_seed(seed, [FOREST, t])`, so trees can be trained
//! concurrently and changing the tree count never reshuffles earlier trees.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::par;
use crate::rng::{derive_rng, stream, Rng};

/// Number of features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(F'))` over the F' selected features.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, selected: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (selected as f64).sqrt().ceil() as usize,
            MaxFeatures::All => selected,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, selected.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: 12,
            min_leaf: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// Small forest for CI-scale runs.
    pub fn fast() -> Self {
        ForestParams {
            n_trees: 10,
            max_depth: 8,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("tree count must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max depth must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter("min leaf size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        votes: [u32; 2],
    },
}

/// A binary decision tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Single-leaf tree holding `votes = [negatives, positives]`.
    pub fn leaf(votes: [u32; 2]) -> Self {
        Tree {
            nodes: vec![Node::Leaf { votes }],
        }
    }

    fn leaf_for(&self, row: &[f64]) -> [u32; 2] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { votes } => return votes,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Leaf majority; ties go to class 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let [neg, pos] = self.leaf_for(row);
        u8::from(pos > neg)
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    pub fn leaf_votes(&self) -> impl Iterator<Item = [u32; 2]> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { votes } => Some(*votes),
            Node::Split { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u8],
    features: &'a [usize],
    params: &'a ForestParams,
    per_split: usize,
    nodes: Vec<Node>,
    scratch: Vec<(f64, u8)>,
}

#[derive(Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn class_counts(y: &[u8], samples: &[usize]) -> [u32; 2] {
    let mut c = [0u32; 2];
    for &i in samples {
        c[usize::from(y[i])] += 1;
    }
    c
}

impl TreeBuilder<'_> {
    fn build(&mut self, samples: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let counts = class_counts(self.y, samples);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { votes: counts });
        let n = samples.len();
        if depth >= self.params.max_depth || n < 2 * self.params.min_leaf || counts[0] == 0 || counts[1] == 0 {
            return id;
        }
        let Some(split) = self.best_split(samples, counts, rng) else {
            return id;
        };
        let mut cut = 0;
        for i in 0..n {
            if self.x.get(samples[i], split.feature) <= split.threshold {
                samples.swap(i, cut);
                cut += 1;
            }
        }
        let (lo, hi) = samples.split_at_mut(cut);
        let left = self.build(lo, depth + 1, rng);
        let right = self.build(hi, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    /// Maximizes `sum_children sum_class count^2 / child_size`, which is
    /// equivalent to minimizing the size-weighted Gini impurity.
    fn best_split(&mut self, samples: &[usize], counts: [u32; 2], rng: &mut Rng) -> Option<SplitChoice> {
        let n = samples.len();
        let min_leaf = self.params.min_leaf;
        let mut best: Option<SplitChoice> = None;
        let picks = sample(rng, self.features.len(), self.per_split);
        for pick in picks.iter() {
            let feature = self.features[pick];
            self.scratch.clear();
            self.scratch
                .extend(samples.iter().map(|&i| (self.x.get(i, feature), self.y[i])));
            self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0f64; 2];
            let total = [f64::from(counts[0]), f64::from(counts[1])];
            for i in 0..n - 1 {
                left[usize::from(self.scratch[i].1)] += 1.0;
                let (v, next) = (self.scratch[i].0, self.scratch[i + 1].0);
                if v >= next {
                    continue;
                }
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let score = (left[0] * left[0] + left[1] * left[1]) / nl as f64
                    + (right[0] * right[0] + right[1] * right[1]) / nr as f64;
                if best.is_none_or(|b| score > b.score) {
                    let mid = v + (next - v) / 2.0;
                    let threshold = if mid < next { mid } else { v };
                    best = Some(SplitChoice {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

fn check_width(x: &FeatureMatrix, mask: &FeatureMask) -> Result<()> {
    if x.n_cols() != mask.len() {
        return Err(Error::LengthMismatch {
            expected: mask.len(),
            actual: x.n_cols(),
        });
    }
    Ok(())
}

/// A trained ensemble and the mask it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    mask: FeatureMask,
}

impl ForestModel {
    pub fn from_trees(trees: Vec<Tree>, mask: FeatureMask) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidParameter("forest needs at least one tree".into()));
        }
        Ok(ForestModel { trees, mask })
    }

    /// Predicts `class` everywhere (a single leaf holding `count` votes).
    pub fn constant(class: u8, count: u32, mask: FeatureMask) -> Self {
        let mut votes = [0; 2];
        votes[usize::from(class)] = count.max(1);
        ForestModel {
            trees: vec![Tree::leaf(votes)],
            mask,
        }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    /// Majority vote over trees; ties go to class 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let ones: usize = self.trees.iter().map(|t| usize::from(t.predict_row(row))).sum();
        u8::from(2 * ones > self.trees.len())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        check_width(x, &self.mask)?;
        Ok((0..x.n_rows()).map(|i| self.predict_row(x.row(i))).collect())
    }

    /// Predictions for the listed rows of `x`.
    pub fn predict_rows(&self, x: &FeatureMatrix, rows: &[usize]) -> Result<Vec<u8>> {
        check_width(x, &self.mask)?;
        Ok(rows.iter().map(|&i| self.predict_row(x.row(i))).collect())
    }
}

/// Trains a forest on all rows of `x` using only the features set in `mask`.
pub fn fit(x: &FeatureMatrix, y: &[u8], mask: &FeatureMask, params: &ForestParams) -> Result<ForestModel> {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    fit_rows(x, y, &rows, mask, params)
}

/// Trains on the subset `rows` of `x` / `y` (labels indexed like `x`).
pub fn fit_rows(
    x: &FeatureMatrix,
    y: &[u8],
    rows: &[usize],
    mask: &FeatureMask,
    params: &ForestParams,
) -> Result<ForestModel> {
    params.validate()?;
    check_width(x, mask)?;
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    let features = mask.selected();
    if features.is_empty() {
        return Err(Error::EmptyMask);
    }
    let counts = class_counts(y, rows);
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    let per_split = params.max_features.resolve(features.len());
    let trees = par::map_range(params.n_trees, |t| {
        let mut rng = derive_rng(params.seed, &[stream::FOREST, t as u64]);
        let mut samples: Vec<usize> = if params.bootstrap {
            (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())]).collect()
        } else {
            rows.to_vec()
        };
        let mut builder = TreeBuilder {
            x,
            y,
            features: &features,
            params,
            per_split,
            nodes: Vec::new(),
            scratch: Vec::with_capacity(samples.len()),
        };
        builder.build(&mut samples, 0, &mut rng);
        Tree { nodes: builder.nodes }
    });
    Ok(ForestModel {
        trees,
        mask: mask.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
        pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn separable_single_feature() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let y: Vec<u8> = xs.iter().map(|r| u8::from(r[0] > 0.5)).collect();
        let x = FeatureMatrix::from_rows(&xs).unwrap();
        let m = fit(&x, &y, &FeatureMask::ones(1), &ForestParams::default().with_seed(4)).unwrap();
        assert_eq!(accuracy(&m.predict(&x).unwrap(), &y), 1.0);
    }

    /// Every depth-1 stump on the XOR table, enumerated directly.
    fn best_xor_stump_accuracy() -> f64 {
        let pts = [([0.0, 0.0], 0u8), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)];
        let mut best: f64 = 0.0;
        for f in 0..2 {
            for &t in &[-0.5, 0.5, 1.5] {
                for left in 0..2u8 {
                    for right in 0..2u8 {
                        let ok = pts
                            .iter()
                            .filter(|(p, y)| (if p[f] <= t { left } else { right }) == *y)
                            .count();
                        best = best.max(ok as f64 / 4.0);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn xor_stump_is_capped() {
        let oracle = best_xor_stump_accuracy();
        assert_eq!(oracle, 0.5);
        let x = matrix(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let y = [0, 1, 1, 0];
        let params = ForestParams {
            n_trees: 1,
            max_depth: 1,
            min_leaf: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        for seed in 0..10 {
            let m = fit(&x, &y, &FeatureMask::ones(2), &params.clone().with_seed(seed)).unwrap();
            let acc = accuracy(&m.predict(&x).unwrap(), &y);
            assert!(acc <= 0.75 && acc <= oracle, "seed {seed}: {acc}");
        }
    }

    #[test]
    fn deterministic_per_seed_and_independent_of_later_trees() {
        let xs: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                vec![
                    (i * 7 % 60) as f64 / 59.0,
                    (i * 13 % 60) as f64 / 59.0,
                    (i % 5) as f64 / 4.0,
                ]
            })
            .collect();
        let y: Vec<u8> = xs.iter().map(|r| u8::from(r[0] + r[1] > 1.0)).collect();
        let x = FeatureMatrix::from_rows(&xs).unwrap();
        let p = ForestParams::default().with_seed(99);
        let a = fit(&x, &y, &FeatureMask::ones(3), &p).unwrap();
        let b = fit(&x, &y, &FeatureMask::ones(3), &p).unwrap();
        assert_eq!(a, b);
        let fewer = fit(&x, &y, &FeatureMask::ones(3), &ForestParams { n_trees: 5, ..p }).unwrap();
        assert_eq!(&a.trees()[..5], fewer.trees());
    }

    #[test]
    fn leaf_and_tie_rules() {
        let x = matrix(&[&[0.2], &[0.9]]);
        let m = ForestModel::from_trees(vec![Tree::leaf([1, 3])], FeatureMask::ones(1)).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![1, 1]);
        let m = ForestModel::from_trees(vec![Tree::leaf([1, 0]), Tree::leaf([0, 1])], FeatureMask::ones(1)).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![0, 0]);
        let empty = FeatureMatrix::new(0, 1, vec![]).unwrap();
        assert!(m.predict(&empty).unwrap().is_empty());
        let wide = matrix(&[&[0.1, 0.2]]);
        assert!(matches!(m.predict(&wide), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn fit_errors() {
        let x = matrix(&[&[0.0], &[1.0]]);
        let p = ForestParams::default();
        assert!(matches!(
            fit(&x, &[0, 1], &FeatureMask::zeros(1), &p),
            Err(Error::EmptyMask)
        ));
        assert!(matches!(
            fit(&x, &[1, 1], &FeatureMask::ones(1), &p),
            Err(Error::SingleClass)
        ));
    }

    fn random_problem(seed: u64, n: usize, f: usize) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = crate::rng::rng_from_seed(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| rng.gen::<f64>()).collect()).collect();
        let y: Vec<u8> = xs.iter().map(|r| u8::from(r[0] + 0.3 * r[f - 1] > 0.6)).collect();
        (FeatureMatrix::from_rows(&xs).unwrap(), y)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn masked_out_columns_do_not_matter(seed in 0u64..1000, bits in proptest::collection::vec(any::<bool>(), 6)) {
            let (x, y) = random_problem(seed, 80, 6);
            let mut mask = FeatureMask::new(bits);
            mask.set(0, true);
            let params = ForestParams { n_trees: 5, ..ForestParams::default() }.with_seed(seed);
            let model = fit(&x, &y, &mask, &params).unwrap();
            let mut rng = crate::rng::rng_from_seed(seed ^ 0xabc);
            let mut probe: Vec<f64> = x.values().to_vec();
            for (k, v) in probe.iter_mut().enumerate() {
                if !mask.get(k % 6) {
                    *v = rng.gen::<f64>();
                }
            }
            let probe = FeatureMatrix::new(80, 6, probe).unwrap();
            prop_assert_eq!(model.predict(&x).unwrap(), model.predict(&probe).unwrap());
            for t in model.trees() {
                prop_assert!(t.split_features().all(|f| mask.get(f)));
                prop_assert!(t.depth() <= params.max_depth);
            }
        }

        #[test]
        fn leaf_votes_account_for_every_sample(seed in 0u64..1000) {
            let (x, y) = random_problem(seed, 50, 3);
            let params = ForestParams { n_trees: 3, ..ForestParams::default() }.with_seed(seed);
            let model = fit(&x, &y, &FeatureMask::ones(3), &params).unwrap();
            for t in model.trees() {
                let total: u32 = t.leaf_votes().map(|v| v[0] + v[1]).sum();
                prop_assert_eq!(total, 50);
            }
        }
    }
}
