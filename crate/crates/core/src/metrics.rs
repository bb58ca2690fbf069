//! Accuracy and fairness measures, and the cross-validated fitness of a mask.
//!
//! All five measures are ratios in `[0, 1]`, higher is better:
//!
//! | measure     | definition                                             |
//! |-------------|--------------------------------------------------------|
//! | gm          | `sqrt(sensitivity * specificity)` over pooled counts    |
//! | dp          | `1 - |P(ŷ=1 | s=0) - P(ŷ=1 | s=1)|`                     |
//! | consistency | `1 - (1/(N k)) Σ_i Σ_{j ∈ kNN(i)} |ŷ_i - ŷ_j|`          |
//! | fperbs      | `1 - |FPR_0 - FPR_1|`                                   |
//! | fnerbs      | `1 - |FNR_0 - FNR_1|`                                   |
//!
//! A rate whose denominator is zero is defined as 0 and the result is flagged
//! as degenerate.

use serde::{Deserialize, Serialize};

use crate::classifier::{fit_rows, ForestModel, ForestParams};
use crate::data::{Dataset, FeatureMatrix, FoldPlan};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::rng::derive_seed;

/// Confusion counts for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(&self, other: &Confusion) -> Confusion {
        Confusion {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

/// Confusion counts split by sensitive group (index 0: s=0, index 1: s=1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub groups: [Confusion; 2],
}

impl GroupConfusion {
    pub fn pooled(&self) -> Confusion {
        self.groups[0].add(&self.groups[1])
    }

    pub fn total(&self) -> u64 {
        self.groups[0].total() + self.groups[1].total()
    }

    /// True if any group-conditional FPR/FNR or pooled sensitivity /
    /// specificity has an empty denominator.
    pub fn is_degenerate(&self) -> bool {
        let p = self.pooled();
        self.groups
            .iter()
            .chain(std::iter::once(&p))
            .any(|c| c.fp + c.tn == 0 || c.fn_ + c.tp == 0)
    }
}

/// `num / den`, or 0 when `den` is 0.
fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

pub fn group_confusion(pred: &[u8], actual: &[u8], s: &[u8]) -> Result<GroupConfusion> {
    check_len(pred.len(), actual.len())?;
    check_len(pred.len(), s.len())?;
    if pred.is_empty() {
        return Err(Error::InvalidParameter("no predictions to score".into()));
    }
    let mut gc = GroupConfusion::default();
    for ((&p, &a), &g) in pred.iter().zip(actual).zip(s) {
        let c = &mut gc.groups[usize::from(g != 0)];
        match (p != 0, a != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(gc)
}

pub fn demographic_parity(pred: &[u8], s: &[u8]) -> Result<f64> {
    check_len(pred.len(), s.len())?;
    let mut positives = [0u64; 2];
    let mut sizes = [0u64; 2];
    for (&p, &g) in pred.iter().zip(s) {
        let g = usize::from(g != 0);
        sizes[g] += 1;
        positives[g] += u64::from(p != 0);
    }
    if sizes[0] == 0 || sizes[1] == 0 {
        return Err(Error::EmptyGroup);
    }
    Ok(1.0 - (rate(positives[0], sizes[0]) - rate(positives[1], sizes[1])).abs())
}

pub fn fperbs(gc: &GroupConfusion) -> f64 {
    let [g0, g1] = gc.groups;
    1.0 - (rate(g0.fp, g0.fp + g0.tn) - rate(g1.fp, g1.fp + g1.tn)).abs()
}

pub fn fnerbs(gc: &GroupConfusion) -> f64 {
    let [g0, g1] = gc.groups;
    1.0 - (rate(g0.fn_, g0.fn_ + g0.tp) - rate(g1.fn_, g1.fn_ + g1.tp)).abs()
}

pub fn gm_sen_spec(gc: &GroupConfusion) -> f64 {
    let p = gc.pooled();
    let sensitivity = rate(p.tp, p.tp + p.fn_);
    let specificity = rate(p.tn, p.tn + p.fp);
    (sensitivity * specificity).sqrt()
}

/// The `k` nearest rows to row `i` by Euclidean distance, excluding `i`;
/// distance ties go to the lower row index.
pub fn nearest_neighbors(x: &FeatureMatrix, i: usize, k: usize) -> Vec<usize> {
    let xi = x.row(i);
    let mut cand: Vec<(f64, usize)> = (0..x.n_rows())
        .filter(|&j| j != i)
        .map(|j| {
            let d: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, j)
        })
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_distance);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_distance);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// Consistency before clamping to `[0, 1]`.
pub fn consistency_raw(pred: &[u8], x: &FeatureMatrix, k: usize) -> Result<f64> {
    let n = x.n_rows();
    check_len(n, pred.len())?;
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "consistency needs 1 <= k < N, got k={k}, N={n}"
        )));
    }
    // Constant predictions: every summand is zero.
    if pred.iter().all(|&p| p == pred[0]) {
        return Ok(1.0);
    }
    let disagreements: u64 = (0..n)
        .map(|i| {
            nearest_neighbors(x, i, k)
                .into_iter()
                .filter(|&j| pred[j] != pred[i])
                .count() as u64
        })
        .sum();
    Ok(1.0 - disagreements as f64 / (n * k) as f64)
}

pub fn consistency(pred: &[u8], x: &FeatureMatrix, k: usize) -> Result<f64> {
    consistency_raw(pred, x, k).map(|c| c.clamp(0.0, 1.0))
}

/// Conditions encountered while scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreFlags {
    /// Some rate had an empty denominator and was taken as 0.
    pub degenerate: bool,
    /// Consistency fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
}

/// The five fitness measures of one classifier / feature subset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    pub gm: f64,
    pub dp: f64,
    pub consistency: f64,
    pub fperbs: f64,
    pub fnerbs: f64,
    #[serde(default)]
    pub flags: ScoreFlags,
}

/// Display names of the five measures, in [`FitnessVector::to_array`] order.
pub const MEASURE_NAMES: [&str; 5] = ["gm", "dp", "consistency", "fperbs", "fnerbs"];

impl FitnessVector {
    pub fn new(gm: f64, dp: f64, consistency: f64, fperbs: f64, fnerbs: f64) -> Self {
        FitnessVector {
            gm,
            dp,
            consistency,
            fperbs,
            fnerbs,
            flags: ScoreFlags::default(),
        }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.gm, self.dp, self.consistency, self.fperbs, self.fnerbs]
    }

    /// (dp, consistency, fperbs, fnerbs).
    pub fn fairness(&self) -> [f64; 4] {
        [self.dp, self.consistency, self.fperbs, self.fnerbs]
    }

    pub fn mean_fairness(&self) -> f64 {
        self.fairness().iter().sum::<f64>() / 4.0
    }

    pub fn in_unit_cube(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Scores predictions against labels and groups; consistency uses `x`.
pub fn score(pred: &[u8], actual: &[u8], s: &[u8], x: &FeatureMatrix, k: usize) -> Result<FitnessVector> {
    let gc = group_confusion(pred, actual, s)?;
    let dp = demographic_parity(pred, s)?;
    let raw = consistency_raw(pred, x, k)?;
    Ok(FitnessVector {
        gm: gm_sen_spec(&gc),
        dp,
        consistency: raw.clamp(0.0, 1.0),
        fperbs: fperbs(&gc),
        fnerbs: fnerbs(&gc),
        flags: ScoreFlags {
            degenerate: gc.is_degenerate(),
            clamped: !(0.0..=1.0).contains(&raw),
        },
    })
}

/// Out-of-fold predictions for every instance of `train`: each fold is
/// predicted by a forest trained on the other folds.
pub fn cross_val_predict(
    mask: &FeatureMask,
    train: &Dataset,
    folds: &FoldPlan,
    params: &ForestParams,
) -> Result<Vec<u8>> {
    check_len(train.n_instances(), folds.n_instances())?;
    let x = train.x();
    let y = train.y();
    let mut pred = vec![0u8; train.n_instances()];
    for fold in 0..folds.k() {
        let fit_on = folds.training(fold);
        let held = folds.held_out(fold);
        let fold_params = ForestParams {
            seed: derive_seed(params.seed, &[fold as u64]),
            ..params.clone()
        };
        let model = match fit_rows(x, y, &fit_on, mask, &fold_params) {
            Ok(m) => m,
            Err(Error::SingleClass) => {
                let class = fit_on.first().map_or(0, |&i| y[i]);
                ForestModel::constant(class, fit_on.len() as u32, mask.clone())
            }
            Err(e) => return Err(e),
        };
        for (i, p) in held.iter().zip(model.predict_rows(x, &held)?) {
            pred[*i] = p;
        }
    }
    Ok(pred)
}

/// Fitness of a feature mask by internal cross-validation on `train`: the
/// pooled out-of-fold predictions are scored once. Consistency neighbours
/// are found in the subspace of the selected features. An empty mask scores
/// all zeros.
pub fn evaluate_mask(
    mask: &FeatureMask,
    train: &Dataset,
    folds: &FoldPlan,
    params: &ForestParams,
    k: usize,
) -> Result<FitnessVector> {
    check_len(train.n_features(), mask.len())?;
    if mask.is_vacant() {
        return Ok(FitnessVector::zeros());
    }
    let pred = cross_val_predict(mask, train, folds, params)?;
    let sub = train.x().select_columns(&mask.selected());
    score(&pred, train.y(), train.s(), &sub, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&v.iter().map(|&a| vec![a]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn confusion_counts() {
        let gc = group_confusion(&[1, 0, 1, 0], &[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(
            gc.groups[0],
            Confusion {
                tp: 1,
                fp: 0,
                tn: 0,
                fn_: 1
            }
        );
        assert_eq!(
            gc.groups[1],
            Confusion {
                tp: 0,
                fp: 1,
                tn: 1,
                fn_: 0
            }
        );

        let y = [1, 0, 1, 1, 0];
        let gc = group_confusion(&y, &y, &[0, 1, 0, 1, 1]).unwrap();
        assert!(gc.groups.iter().all(|c| c.fp == 0 && c.fn_ == 0));

        let gc = group_confusion(&[1, 0], &[1, 1], &[1, 1]).unwrap();
        assert_eq!(gc.groups[0], Confusion::default());
        assert_eq!(gc.total(), 2);

        assert!(group_confusion(&[1], &[1, 0], &[0, 1]).is_err());
    }

    #[test]
    fn demographic_parity_examples() {
        let pred = [1, 1, 0, 1, 1, 0, 0, 0];
        let s = [0, 0, 0, 0, 1, 1, 1, 1];
        assert_abs_diff_eq!(demographic_parity(&pred, &s).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(demographic_parity(&[1, 0, 1, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(demographic_parity(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert!(matches!(demographic_parity(&[1, 0], &[0, 0]), Err(Error::EmptyGroup)));
    }

    #[test]
    fn error_rate_balance_examples() {
        let gc = GroupConfusion {
            groups: [
                Confusion {
                    tp: 0,
                    fp: 1,
                    tn: 3,
                    fn_: 0,
                },
                Confusion {
                    tp: 0,
                    fp: 2,
                    tn: 2,
                    fn_: 0,
                },
            ],
        };
        assert_abs_diff_eq!(fperbs(&gc), 0.75, epsilon = 1e-12);

        let gc = GroupConfusion {
            groups: [
                Confusion {
                    tp: 4,
                    fp: 0,
                    tn: 0,
                    fn_: 0,
                },
                Confusion {
                    tp: 3,
                    fp: 0,
                    tn: 0,
                    fn_: 1,
                },
            ],
        };
        assert_abs_diff_eq!(fnerbs(&gc), 0.75, epsilon = 1e-12);

        // group 1 has no negatives: its FPR is 0
        let gc = GroupConfusion {
            groups: [
                Confusion {
                    tp: 1,
                    fp: 1,
                    tn: 3,
                    fn_: 0,
                },
                Confusion {
                    tp: 2,
                    fp: 0,
                    tn: 0,
                    fn_: 0,
                },
            ],
        };
        assert_abs_diff_eq!(fperbs(&gc), 1.0 - 0.25, epsilon = 1e-12);
        assert!(gc.is_degenerate());

        let only_negatives = GroupConfusion {
            groups: [
                Confusion {
                    tp: 0,
                    fp: 1,
                    tn: 3,
                    fn_: 0,
                },
                Confusion {
                    tp: 0,
                    fp: 0,
                    tn: 2,
                    fn_: 0,
                },
            ],
        };
        assert_eq!(fnerbs(&only_negatives), 1.0);
    }

    #[test]
    fn gm_examples() {
        // sensitivity 9/10, specificity 4/10
        let gc = GroupConfusion {
            groups: [
                Confusion {
                    tp: 9,
                    fp: 6,
                    tn: 4,
                    fn_: 1,
                },
                Confusion::default(),
            ],
        };
        assert_abs_diff_eq!(gm_sen_spec(&gc), 0.6, epsilon = 1e-12);

        let y = [1, 0, 1, 0, 0];
        let s = [0, 0, 1, 1, 1];
        assert_eq!(gm_sen_spec(&group_confusion(&y, &y, &s).unwrap()), 1.0);
        let all_pos = group_confusion(&[1; 5], &y, &s).unwrap();
        assert_eq!(gm_sen_spec(&all_pos), 0.0);
    }

    #[test]
    fn consistency_examples() {
        let x = col(&[0.0, 0.1, 1.0]);
        assert_eq!(nearest_neighbors(&x, 0, 1), vec![1]);
        assert_eq!(nearest_neighbors(&x, 1, 1), vec![0]);
        assert_eq!(nearest_neighbors(&x, 2, 1), vec![1]);
        assert_abs_diff_eq!(consistency(&[1, 1, 0], &x, 1).unwrap(), 2.0 / 3.0, epsilon = 1e-12);

        assert_eq!(consistency(&[1, 1, 1], &x, 2).unwrap(), 1.0);

        // every instance's 3 neighbours are the other three, two of which
        // disagree: 8 disagreements over N*k = 12 pairs
        let x4 = col(&[0.0, 0.3, 0.6, 0.9]);
        assert_abs_diff_eq!(consistency(&[1, 0, 1, 0], &x4, 3).unwrap(), 1.0 / 3.0, epsilon = 1e-12);

        assert!(consistency(&[1, 0, 1], &x, 3).is_err());
        assert!(consistency(&[1, 0, 1], &x, 0).is_err());
    }

    #[test]
    fn neighbour_ties_prefer_lower_index() {
        let x = col(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(nearest_neighbors(&x, 2, 2), vec![0, 1]);
        assert_eq!(nearest_neighbors(&x, 0, 2), vec![1, 2]);
    }

    #[test]
    fn score_flags_degenerate_groups() {
        let x = col(&[0.0, 0.2, 0.4, 0.6]);
        let f = score(&[1, 0, 1, 0], &[1, 0, 1, 0], &[0, 0, 1, 1], &x, 1).unwrap();
        assert_eq!(f.gm, 1.0);
        assert!(!f.flags.degenerate);
        let f = score(&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1], &x, 1).unwrap();
        assert!(f.flags.degenerate);
        assert!(f.in_unit_cube());
    }
}
