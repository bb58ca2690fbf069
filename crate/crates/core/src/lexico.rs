//! Lexicographic comparison of individuals: accuracy (GM) first within
//! `accuracy_eps`; otherwise a vote over all 24 priority orders of the four
//! fairness measures; otherwise raw GM.
//!
//! ε-comparison is not transitive, so population-level operations
//! ([`tournament_select`], [`lexicographic_top`]) are defined by an explicit
//! scan order.

use std::sync::OnceLock;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::metrics::FitnessVector;

/// Outcome of comparing a first and a second candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preference {
    First,
    Second,
    Tie,
}

impl Preference {
    pub fn flip(self) -> Self {
        match self {
            Preference::First => Preference::Second,
            Preference::Second => Preference::First,
            Preference::Tie => Preference::Tie,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicoParams {
    pub accuracy_eps: f64,
    pub fairness_eps: f64,
    /// Minimum permutation-win margin that decides the fairness stage.
    pub fair_rank_eps: u32,
    /// Stored for completeness; not consulted by the comparison.
    pub fair_test_eps: u32,
}

impl Default for LexicoParams {
    fn default() -> Self {
        LexicoParams {
            accuracy_eps: 0.01,
            fairness_eps: 0.01,
            fair_rank_eps: 1,
            fair_test_eps: 1,
        }
    }
}

impl LexicoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.accuracy_eps >= 0.0 && self.fairness_eps >= 0.0) {
            return Err(Error::InvalidParameter(
                "accuracy_eps and fairness_eps must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// A GA individual: a feature mask and, once evaluated, its fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub mask: FeatureMask,
    pub fitness: Option<FitnessVector>,
}

impl Individual {
    pub fn new(mask: FeatureMask) -> Self {
        Individual { mask, fitness: None }
    }

    pub fn evaluated(mask: FeatureMask, fitness: FitnessVector) -> Self {
        Individual {
            mask,
            fitness: Some(fitness),
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }

    /// Fitness of an evaluated individual.
    ///
    /// # Panics
    /// If the individual has not been evaluated.
    pub fn fitness(&self) -> &FitnessVector {
        self.fitness.as_ref().expect("individual compared before evaluation")
    }
}

pub fn eps_compare(v1: f64, v2: f64, eps: f64) -> Preference {
    if v1 - v2 > eps {
        Preference::First
    } else if v2 - v1 > eps {
        Preference::Second
    } else {
        Preference::Tie
    }
}

/// The 24 priority orders of the fairness measures, as indices into
/// [`FitnessVector::fairness`].
pub fn fairness_orders() -> &'static [[usize; 4]] {
    static ORDERS: OnceLock<Vec<[usize; 4]>> = OnceLock::new();
    ORDERS.get_or_init(|| (0..4).permutations(4).map(|p| [p[0], p[1], p[2], p[3]]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Vote {
    pub wins_a: u32,
    pub wins_b: u32,
    pub ties: u32,
}

/// Lexicographic comparison of the fairness measures under every priority order.
pub fn permutation_vote(a: &FitnessVector, b: &FitnessVector, p: &LexicoParams) -> Vote {
    let (fa, fb) = (a.fairness(), b.fairness());
    let mut vote = Vote::default();
    for order in fairness_orders() {
        let outcome = order
            .iter()
            .map(|&m| eps_compare(fa[m], fb[m], p.fairness_eps))
            .find(|&o| o != Preference::Tie)
            .unwrap_or(Preference::Tie);
        match outcome {
            Preference::First => vote.wins_a += 1,
            Preference::Second => vote.wins_b += 1,
            Preference::Tie => vote.ties += 1,
        }
    }
    vote
}

pub fn compare_fitness(a: &FitnessVector, b: &FitnessVector, p: &LexicoParams) -> Preference {
    match eps_compare(a.gm, b.gm, p.accuracy_eps) {
        Preference::Tie => {}
        decided => return decided,
    }
    let vote = permutation_vote(a, b, p);
    if vote.wins_a.abs_diff(vote.wins_b) >= p.fair_rank_eps.max(1) {
        return if vote.wins_a > vote.wins_b {
            Preference::First
        } else {
            Preference::Second
        };
    }
    eps_compare(a.gm, b.gm, 0.0)
}

pub fn lex_compare(a: &Individual, b: &Individual, p: &LexicoParams) -> Preference {
    compare_fitness(a.fitness(), b.fitness(), p)
}

fn ensure_evaluated(pop: &[Individual]) -> Result<()> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if pop.iter().any(|i| !i.is_evaluated()) {
        return Err(Error::InvalidParameter(
            "population contains unevaluated individuals".into(),
        ));
    }
    Ok(())
}

/// Index of the tournament winner among `size` distinct uniformly sampled
/// individuals. A challenger replaces the current winner only by winning
/// outright, so ties keep the earlier-sampled individual.
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &[Individual],
    p: &LexicoParams,
    size: usize,
    rng: &mut R,
) -> Result<usize> {
    ensure_evaluated(pop)?;
    let size = size.clamp(1, pop.len());
    let picks = sample(rng, pop.len(), size);
    let mut iter = picks.iter();
    let mut winner = iter.next().expect("size >= 1");
    for challenger in iter {
        if lex_compare(&pop[challenger], &pop[winner], p) == Preference::First {
            winner = challenger;
        }
    }
    Ok(winner)
}

/// Champion of a linear scan from index 0: a challenger replaces the
/// champion iff it wins outright.
pub fn lexicographic_top(pop: &[Individual], p: &LexicoParams) -> Result<usize> {
    ensure_evaluated(pop)?;
    let mut champion = 0;
    for i in 1..pop.len() {
        if lex_compare(&pop[i], &pop[champion], p) == Preference::First {
            champion = i;
        }
    }
    Ok(champion)
}
