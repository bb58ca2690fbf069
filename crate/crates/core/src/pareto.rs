//! NSGA-II machinery and the Pareto GA over (GM, mean fairness).
//!
//! Everything here maximizes. Sorting and crowding are generic over the
//! number of objectives so the same code serves the two-objective search and
//! five-measure post-hoc analyses.

use rand::seq::index::sample;
use rand::Rng;

use crate::classifier::ForestParams;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evolve::{breed, init_ramped, Evaluator, GAParams};
use crate::lexico::Individual;
use crate::mask::FeatureMask;
use crate::metrics::FitnessVector;
use crate::rng::{derive_rng, stream};

/// The two objectives of the Pareto search, with the population index it
/// was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePoint {
    pub gm: f64,
    pub fairness: f64,
    pub index: usize,
}

impl ObjectivePoint {
    pub fn from_fitness(f: &FitnessVector, index: usize) -> Self {
        ObjectivePoint {
            gm: f.gm,
            fairness: f.mean_fairness(),
            index,
        }
    }

    pub fn objectives(&self) -> [f64; 2] {
        [self.gm, self.fairness]
    }
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPopulation {
    /// Fronts in rank order; members in ascending index order.
    pub fronts: Vec<Vec<usize>>,
    /// Front number of every point.
    pub rank: Vec<usize>,
}

/// Deb's fast non-dominated sort.
pub fn fast_nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> RankedPopulation {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominators = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by_me[i].push(j);
                dominators[j] += 1;
            } else if dominates(b, a) {
                dominated_by_me[j].push(i);
                dominators[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominators[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = fronts.len();
            for &j in &dominated_by_me[i] {
                dominators[j] -= 1;
                if dominators[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    RankedPopulation { fronts, rank }
}

/// Crowding distance of each member of `front` (indices into `points`),
/// returned in the order of `front`. Boundary points get `f64::INFINITY`;
/// an objective with zero range adds nothing to interior points.
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let n_obj = points[front[0]].as_ref().len();
    let mut order: Vec<usize> = (0..m).collect();
    for o in 0..n_obj {
        let value = |pos: usize| points[front[pos]].as_ref()[o];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(front[a].cmp(&front[b])));
        let (lo, hi) = (value(order[0]), value(order[m - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..m - 1 {
            dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / range;
        }
    }
    dist
}

/// Rank and crowding distance for every point.
#[derive(Debug, Clone, PartialEq)]
pub struct RankCrowding {
    pub ranked: RankedPopulation,
    pub crowding: Vec<f64>,
}

impl RankCrowding {
    pub fn compute<P: AsRef<[f64]>>(points: &[P]) -> Self {
        let ranked = fast_nondominated_sort(points);
        let mut crowding = vec![0.0; points.len()];
        for front in &ranked.fronts {
            for (&i, d) in front.iter().zip(crowding_distance(points, front)) {
                crowding[i] = d;
            }
        }
        RankCrowding { ranked, crowding }
    }

    /// Crowded-comparison order: lower rank, then larger distance.
    pub fn better(&self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.ranked.rank[a], self.ranked.rank[b]);
        ra < rb || (ra == rb && self.crowding[a] > self.crowding[b])
    }
}

/// Survivor selection: whole fronts while they fit, then the split front by
/// descending crowding distance (ties to the lower index). Returns selected
/// indices in admission order.
pub fn environmental_selection(rc: &RankCrowding, n: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(n);
    for front in &rc.ranked.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend_from_slice(front);
            continue;
        }
        let mut rest = front.clone();
        rest.sort_by(|&a, &b| rc.crowding[b].total_cmp(&rc.crowding[a]).then(a.cmp(&b)));
        chosen.extend(rest.into_iter().take(n - chosen.len()));
        break;
    }
    chosen
}

/// Tournament on the crowded-comparison order among `size` distinct sampled
/// indices; ties keep the earlier-sampled one.
pub fn crowded_tournament<R: Rng + ?Sized>(rc: &RankCrowding, size: usize, rng: &mut R) -> Result<usize> {
    let n = rc.crowding.len();
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    let picks = sample(rng, n, size.clamp(1, n));
    let mut best = picks.index(0);
    for c in picks.iter().skip(1) {
        if rc.better(c, best) {
            best = c;
        }
    }
    Ok(best)
}

fn objectives(pop: &[Individual]) -> Vec<[f64; 2]> {
    pop.iter()
        .enumerate()
        .map(|(i, ind)| ObjectivePoint::from_fitness(ind.fitness(), i).objectives())
        .collect()
}

/// First front of `pop` in population order, duplicate masks removed.
pub fn first_front(pop: &[Individual]) -> Vec<Individual> {
    let ranked = fast_nondominated_sort(&objectives(pop));
    let mut seen: Vec<&FeatureMask> = Vec::new();
    let mut out = Vec::new();
    for &i in &ranked.fronts[0] {
        if !seen.contains(&&pop[i].mask) {
            seen.push(&pop[i].mask);
            out.push(pop[i].clone());
        }
    }
    out
}

/// Snapshot handed to observers after each survivor selection (and once for
/// the initial population).
pub struct ParetoView<'a> {
    pub index: usize,
    pub population: &'a [Individual],
    pub rank: &'a [usize],
}

/// Pareto GA; returns the deduplicated first front of the final population.
pub fn run_pgaffs(train: &Dataset, g: &GAParams, fp: &ForestParams) -> Result<Vec<Individual>> {
    run_pgaffs_with(train, g, fp, |_| {})
}

/// [`run_pgaffs`] with a per-generation callback. The evaluation budget
/// matches the lexicographic GA: `max_iterations` evaluated populations,
/// the first being the initial one.
pub fn run_pgaffs_with<F>(train: &Dataset, g: &GAParams, fp: &ForestParams, mut observe: F) -> Result<Vec<Individual>>
where
    F: FnMut(&ParetoView<'_>),
{
    g.validate()?;
    let mut evaluator = Evaluator::for_run(train, g, fp)?;
    let mut rng = derive_rng(g.seed, &[stream::PGAFFS]);
    let mut population = init_ramped(train.n_features(), g, &mut rng);
    evaluator.evaluate(&mut population)?;
    let mut rc = RankCrowding::compute(&objectives(&population));
    observe(&ParetoView {
        index: 0,
        population: &population,
        rank: &rc.ranked.rank,
    });
    for generation in 1..g.max_iterations {
        let mut offspring = Vec::with_capacity(g.population_size);
        while offspring.len() < g.population_size {
            let i1 = crowded_tournament(&rc, g.tournament_size, &mut rng)?;
            let i2 = crowded_tournament(&rc, g.tournament_size, &mut rng)?;
            let (c1, c2) = breed(&population[i1].mask, &population[i2].mask, g, &mut rng)?;
            offspring.push(Individual::new(c1));
            if offspring.len() < g.population_size {
                offspring.push(Individual::new(c2));
            }
        }
        evaluator.evaluate(&mut offspring)?;
        let merged: Vec<Individual> = population.into_iter().chain(offspring).collect();
        let merged_rc = RankCrowding::compute(&objectives(&merged));
        let keep = environmental_selection(&merged_rc, g.population_size);
        population = keep.iter().map(|&i| merged[i].clone()).collect();
        rc = RankCrowding {
            ranked: RankedPopulation {
                fronts: Vec::new(),
                rank: keep.iter().map(|&i| merged_rc.ranked.rank[i]).collect(),
            },
            crowding: keep.iter().map(|&i| merged_rc.crowding[i]).collect(),
        };
        observe(&ParetoView {
            index: generation,
            population: &population,
            rank: &rc.ranked.rank,
        });
        log::debug!(
            "pgaffs generation {generation}: first front {}",
            rc.ranked.rank.iter().filter(|&&r| r == 0).count()
        );
    }
    Ok(first_front(&population))
}
