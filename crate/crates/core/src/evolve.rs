//! Shared GA substrate (ramped initialization, uniform crossover, bit-flip
//! mutation, cached fitness evaluation) and the lexicographic GA loop.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::ForestParams;
use crate::data::{make_folds, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::lexico::{lexicographic_top, tournament_select, Individual, LexicoParams};
use crate::mask::FeatureMask;
use crate::metrics::{evaluate_mask, FitnessVector};
use crate::par;
use crate::rng::{derive_rng, derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GAParams {
    pub population_size: usize,
    pub max_iterations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub tournament_size: usize,
    /// Internal cross-validation folds.
    pub folds: usize,
    /// k of the consistency measure.
    pub neighbors: usize,
    pub seed: u64,
}

impl Default for GAParams {
    fn default() -> Self {
        GAParams {
            population_size: 101,
            max_iterations: 50,
            crossover_prob: 0.9,
            mutation_prob: 0.05,
            min_p: 0.1,
            max_p: 0.5,
            tournament_size: 2,
            folds: 3,
            neighbors: 5,
            seed: 0,
        }
    }
}

impl GAParams {
    /// CI-scale population and iteration budget.
    pub fn fast() -> Self {
        GAParams {
            population_size: 20,
            max_iterations: 10,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.population_size < 2 {
            return bad("population size must be >= 2");
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) || !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(0.0 <= self.min_p && self.min_p <= self.max_p && self.max_p <= 1.0) {
            return bad("need 0 <= min_p <= max_p <= 1");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be >= 1");
        }
        if self.neighbors == 0 {
            return bad("consistency neighbours must be >= 1");
        }
        Ok(())
    }
}

/// Per-bit selection probability of individual `i` in a ramped population.
pub fn ramp_probability(i: usize, population_size: usize, min_p: f64, max_p: f64) -> f64 {
    if population_size <= 1 {
        return min_p;
    }
    min_p + (max_p - min_p) * i as f64 / (population_size - 1) as f64
}

/// Ramped initialization: individual `i` turns each feature on with its own
/// probability, interpolated linearly from `min_p` to `max_p`.
pub fn init_ramped<R: Rng + ?Sized>(n_features: usize, g: &GAParams, rng: &mut R) -> Vec<Individual> {
    (0..g.population_size)
        .map(|i| {
            let p = ramp_probability(i, g.population_size, g.min_p, g.max_p);
            let mut mask = FeatureMask::new((0..n_features).map(|_| rng.gen_bool(p)).collect());
            mask.repair(rng);
            Individual::new(mask)
        })
        .collect()
}

/// Uniform crossover with an explicit swap pattern: `swaps[j]` exchanges bit
/// `j` between the children.
pub fn crossover_with_swaps(a: &FeatureMask, b: &FeatureMask, swaps: &[bool]) -> Result<(FeatureMask, FeatureMask)> {
    if a.len() != b.len() || swaps.len() != a.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: if a.len() != b.len() { b.len() } else { swaps.len() },
        });
    }
    let (mut c1, mut c2) = (a.clone(), b.clone());
    for (j, &swap) in swaps.iter().enumerate() {
        if swap {
            c1.set(j, b.get(j));
            c2.set(j, a.get(j));
        }
    }
    Ok((c1, c2))
}

pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &FeatureMask,
    b: &FeatureMask,
    rng: &mut R,
) -> Result<(FeatureMask, FeatureMask)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let swaps: Vec<bool> = (0..a.len()).map(|_| rng.gen_bool(0.5)).collect();
    crossover_with_swaps(a, b, &swaps)
}

/// Independent bit flips with probability `rate`; an all-zero result gets
/// one random bit set.
pub fn mutate<R: Rng + ?Sized>(m: &FeatureMask, rate: f64, rng: &mut R) -> FeatureMask {
    let mut out = m.clone();
    for j in 0..out.len() {
        if rng.gen_bool(rate) {
            out.flip(j);
        }
    }
    out.repair(rng);
    out
}

/// Breeds two children from two parents: crossover with probability
/// `crossover_prob` (otherwise copies), then mutation of both.
pub fn breed<R: Rng + ?Sized>(
    a: &FeatureMask,
    b: &FeatureMask,
    g: &GAParams,
    rng: &mut R,
) -> Result<(FeatureMask, FeatureMask)> {
    let (c1, c2) = if rng.gen_bool(g.crossover_prob) {
        uniform_crossover(a, b, rng)?
    } else {
        (a.clone(), b.clone())
    };
    Ok((mutate(&c1, g.mutation_prob, rng), mutate(&c2, g.mutation_prob, rng)))
}

/// Fitness function of a run: fixed training set, fold plan and forest seed,
/// so fitness is a pure function of the mask and is cached by mask.
pub struct Evaluator<'a> {
    train: &'a Dataset,
    folds: FoldPlan,
    forest: ForestParams,
    neighbors: usize,
    cache: HashMap<FeatureMask, FitnessVector>,
}

impl<'a> Evaluator<'a> {
    pub fn new(train: &'a Dataset, folds: FoldPlan, forest: ForestParams, neighbors: usize) -> Result<Self> {
        if folds.n_instances() != train.n_instances() {
            return Err(Error::LengthMismatch {
                expected: train.n_instances(),
                actual: folds.n_instances(),
            });
        }
        Ok(Evaluator {
            train,
            folds,
            forest,
            neighbors,
            cache: HashMap::new(),
        })
    }

    /// Evaluator for a GA run seeded by `g.seed`: the fold plan and the
    /// forest seed both derive from it (`forest.seed` is replaced).
    pub fn for_run(train: &'a Dataset, g: &GAParams, forest: &ForestParams) -> Result<Self> {
        let folds = make_folds(train, g.folds, g.seed)?;
        let forest = ForestParams {
            seed: derive_seed(g.seed, &[stream::FOREST]),
            ..forest.clone()
        };
        Self::new(train, folds, forest, g.neighbors)
    }

    pub fn fold_plan(&self) -> &FoldPlan {
        &self.folds
    }

    /// Number of distinct masks evaluated so far.
    pub fn distinct_evaluations(&self) -> usize {
        self.cache.len()
    }

    pub fn evaluate_one(&mut self, mask: &FeatureMask) -> Result<FitnessVector> {
        let mut ind = [Individual::new(mask.clone())];
        self.evaluate(&mut ind)?;
        Ok(*ind[0].fitness())
    }

    /// Fills in the fitness of every unevaluated individual. Distinct
    /// uncached masks are evaluated concurrently.
    pub fn evaluate(&mut self, pop: &mut [Individual]) -> Result<()> {
        let mut pending: Vec<FeatureMask> = Vec::new();
        for ind in pop.iter().filter(|i| !i.is_evaluated()) {
            if ind.mask.is_vacant() {
                return Err(Error::EmptyMask);
            }
            if !self.cache.contains_key(&ind.mask) && !pending.contains(&ind.mask) {
                pending.push(ind.mask.clone());
            }
        }
        let (train, folds, forest, k) = (self.train, &self.folds, &self.forest, self.neighbors);
        let results = par::map(&pending, |m| evaluate_mask(m, train, folds, forest, k));
        for (mask, fitness) in pending.into_iter().zip(results) {
            self.cache.insert(mask, fitness?);
        }
        for ind in pop.iter_mut().filter(|i| !i.is_evaluated()) {
            ind.fitness = Some(self.cache[&ind.mask]);
        }
        Ok(())
    }
}

/// Snapshot handed to observers once a generation has been evaluated.
pub struct GenerationView<'a> {
    pub index: usize,
    pub population: &'a [Individual],
    /// Index of the lexicographic elite within `population`.
    pub elite: usize,
}

/// One line of the per-generation progress log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub algorithm: String,
    pub generation: usize,
    pub fitness: FitnessVector,
    pub selected: usize,
    /// Size of the first front (Pareto GA) or 1.
    pub front_size: usize,
}

impl ProgressRecord {
    pub const HEADER: &'static str = "algorithm\tgeneration\tgm\tdp\tconsistency\tfperbs\tfnerbs\tselected\tfront_size";
}

impl fmt::Display for ProgressRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.fitness.to_array();
        write!(
            f,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
            self.algorithm, self.generation, v[0], v[1], v[2], v[3], v[4], self.selected, self.front_size
        )
    }
}

/// Lexicographic GA; returns the final elite.
pub fn run_lgaffs(train: &Dataset, g: &GAParams, lp: &LexicoParams, fp: &ForestParams) -> Result<Individual> {
    run_lgaffs_with(train, g, lp, fp, |_| {})
}

/// [`run_lgaffs`] with a callback after each generation's evaluation.
pub fn run_lgaffs_with<F>(
    train: &Dataset,
    g: &GAParams,
    lp: &LexicoParams,
    fp: &ForestParams,
    mut observe: F,
) -> Result<Individual>
where
    F: FnMut(&GenerationView<'_>),
{
    g.validate()?;
    lp.validate()?;
    let mut evaluator = Evaluator::for_run(train, g, fp)?;
    let mut rng = derive_rng(g.seed, &[stream::LGAFFS]);
    let mut population = init_ramped(train.n_features(), g, &mut rng);
    let mut elite = None;
    for generation in 0..g.max_iterations {
        evaluator.evaluate(&mut population)?;
        let top = lexicographic_top(&population, lp)?;
        observe(&GenerationView {
            index: generation,
            population: &population,
            elite: top,
        });
        let best = population[top].clone();
        log::debug!(
            "lgaffs generation {generation}: gm {:.4}, {} features",
            best.fitness().gm,
            best.mask.count_ones()
        );
        if generation + 1 == g.max_iterations {
            elite = Some(best);
            break;
        }
        let mut next = Vec::with_capacity(g.population_size);
        next.push(best);
        while next.len() < g.population_size {
            let i1 = tournament_select(&population, lp, g.tournament_size, &mut rng)?;
            let i2 = tournament_select(&population, lp, g.tournament_size, &mut rng)?;
            let (c1, c2) = breed(&population[i1].mask, &population[i2].mask, g, &mut rng)?;
            next.push(Individual::new(c1));
            if next.len() < g.population_size {
                next.push(Individual::new(c2));
            }
        }
        population = next;
    }
    Ok(elite.expect("max_iterations >= 1"))
}
