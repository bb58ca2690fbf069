//! Fair feature selection with multi-objective genetic algorithms.
//!
//! Two wrapper feature-selection GAs share one fitness function (a random
//! forest scored by internal cross-validation on five measures: the geometric
//! mean of sensitivity and specificity plus four fairness measures):
//!
//! - [`evolve::run_lgaffs`]: lexicographic GA, accuracy first, fairness
//!   aggregated by a vote over all 24 priority orders of the fairness measures.
//! - [`pareto::run_pgaffs`]: NSGA-II over (accuracy, mean fairness).
//!
//! [`compare`] holds the post-hoc machinery used to contrast the two
//! (lexicographic filter, domination statistics, Wilcoxon signed-rank test),
//! and [`experiment`] wires everything into seed-controlled runs with
//! versioned artifacts.
//!
//! With the default `parallel` feature, fitness evaluation and forest training
//! run on rayon; without it the same code runs sequentially. Results are
//! bit-identical either way.

pub mod classifier;
pub mod compare;
pub mod data;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod lexico;
pub mod mask;
pub mod metrics;
pub mod par;
pub mod pareto;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
pub use mask::FeatureMask;
pub use metrics::FitnessVector;
