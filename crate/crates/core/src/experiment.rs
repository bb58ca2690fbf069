//! Seed-controlled experiment pipelines behind the command-line tool.
//!
//! A run splits the data, searches on the training side, retrains a forest
//! on the full training side under each returned mask and scores it on the
//! held-out side. Each seed writes one JSON [`ProblemResult`] embedding the
//! resolved [`ExperimentSpec`], a per-generation progress log and the final
//! Pareto front as CSV. Artifacts contain no timestamps or host data, so a
//! rerun with the same spec reproduces them byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{fit, ForestParams};
use crate::compare::{
    build_report, filter_index, read_measure_table_file, ComparisonReport, ProblemResult, SolutionRecord,
};
use crate::data::{load_configured, train_test_split, Dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::evolve::{run_lgaffs_with, GAParams, ProgressRecord};
use crate::lexico::{Individual, LexicoParams};
use crate::mask::FeatureMask;
use crate::metrics::{score, FitnessVector};
use crate::pareto::{run_pgaffs_with, ObjectivePoint};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lgaffs,
    Pgaffs,
    #[default]
    Both,
}

impl Algorithm {
    pub fn runs_lgaffs(self) -> bool {
        matches!(self, Algorithm::Lgaffs | Algorithm::Both)
    }

    pub fn runs_pgaffs(self) -> bool {
        matches!(self, Algorithm::Pgaffs | Algorithm::Both)
    }
}

fn default_test_fraction() -> f64 {
    0.3
}

/// Everything needed to reproduce a run. `ga.seed` is replaced by each
/// entry of `seeds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset_config: PathBuf,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub ga: GAParams,
    #[serde(default)]
    pub lexico: LexicoParams,
    #[serde(default)]
    pub forest: ForestParams,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
    /// Not embedded in artifacts, so output location does not affect them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(dataset_config: impl Into<PathBuf>, seeds: Vec<u64>) -> Self {
        ExperimentSpec {
            dataset_config: dataset_config.into(),
            algorithm: Algorithm::Both,
            ga: GAParams::default(),
            lexico: LexicoParams::default(),
            forest: ForestParams::default(),
            test_fraction: default_test_fraction(),
            seeds,
            output_dir: None,
        }
    }

    /// Small forest, population 20 and 10 iterations.
    pub fn fast(mut self) -> Self {
        let seed = self.ga.seed;
        self.ga = GAParams::fast().with_seed(seed);
        self.forest = ForestParams::fast();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("at least one seed is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter("test fraction must lie in (0, 1)".into()));
        }
        self.ga.validate()?;
        self.lexico.validate()?;
        self.forest.validate()?;
        if !self.dataset_config.is_file() {
            return Err(Error::Config(format!(
                "dataset config {} does not exist",
                self.dataset_config.display()
            )));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The spec of a single-seed rerun, as embedded in artifacts.
    fn for_seed(&self, seed: u64) -> Self {
        ExperimentSpec {
            ga: self.ga.clone().with_seed(seed),
            seeds: vec![seed],
            output_dir: None,
            ..self.clone()
        }
    }
}

/// Files written by one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedArtifacts {
    pub seed: u64,
    pub result: PathBuf,
    pub progress: PathBuf,
    pub front: Option<PathBuf>,
}

/// Forest retrained on all of `train` under `mask`, scored on `test`.
pub fn holdout_fitness(
    mask: &FeatureMask,
    train: &Dataset,
    test: &Dataset,
    forest: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<FitnessVector> {
    let params = ForestParams {
        seed: derive_seed(seed, &[stream::FINAL_MODEL]),
        ..forest.clone()
    };
    let model = fit(train.x(), train.y(), mask, &params)?;
    let pred = model.predict(test.x())?;
    let sub = test.x().select_columns(&mask.selected());
    score(&pred, test.y(), test.s(), &sub, k)
}

fn record(ind: &Individual, names: &[String], test: FitnessVector) -> SolutionRecord {
    SolutionRecord {
        mask: Some(ind.mask.clone()),
        features: ind.mask.selected().into_iter().map(|j| names[j].clone()).collect(),
        train: Some(*ind.fitness()),
        test,
    }
}

fn front_csv(front: &[SolutionRecord]) -> String {
    let mut out = String::from(
        "mask,gm_objective,fairness_objective,train_gm,train_dp,train_consistency,train_fperbs,train_fnerbs,\
         test_gm,test_dp,test_consistency,test_fperbs,test_fnerbs\n",
    );
    for r in front {
        let train = r.ranking_fitness();
        let p = ObjectivePoint::from_fitness(&train, 0);
        let mask = r.mask.as_ref().map(ToString::to_string).unwrap_or_default();
        let _ = write!(out, "{mask},{:.6},{:.6}", p.gm, p.fairness);
        for v in train.to_array().iter().chain(r.test.to_array().iter()) {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

fn slug(s: &str) -> String {
    let t: String = s
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if t.is_empty() {
        "problem".into()
    } else {
        t
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs every seed of `spec` into `out_dir`. Inputs are validated and the
/// dataset is loaded before anything is written. If a seed fails, an
/// `INCOMPLETE` marker describing the failure is left next to the partial
/// artifacts.
pub fn cmd_run(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<SeedArtifacts>> {
    spec.validate()?;
    let config = DatasetConfig::from_toml_file(&spec.dataset_config)?;
    let data = load_configured(&config)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let marker = out_dir.join("INCOMPLETE");
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    let mut written = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        match run_seed(spec, &config, &data, seed, out_dir) {
            Ok(a) => written.push(a),
            Err(e) => {
                let _ = write_file(&marker, &format!("seed {seed} failed: {e}\n"));
                return Err(e);
            }
        }
    }
    Ok(written)
}

fn run_seed(
    spec: &ExperimentSpec,
    config: &DatasetConfig,
    data: &Dataset,
    seed: u64,
    out_dir: &Path,
) -> Result<SeedArtifacts> {
    let resolved = spec.for_seed(seed);
    let g = &resolved.ga;
    let k = g.neighbors;
    let (train, test) = train_test_split(data, spec.test_fraction, seed)?;
    let names = data.feature_names();
    let mut progress = format!("{}\n", ProgressRecord::HEADER);
    let mut result = ProblemResult::new(&config.dataset_id, &config.sensitive_id);
    result.seed = Some(seed);

    if spec.algorithm.runs_lgaffs() {
        let best = run_lgaffs_with(&train, g, &spec.lexico, &spec.forest, |v| {
            let elite = &v.population[v.elite];
            let rec = ProgressRecord {
                algorithm: "lgaffs".into(),
                generation: v.index,
                fitness: *elite.fitness(),
                selected: elite.mask.count_ones(),
                front_size: 1,
            };
            let _ = writeln!(progress, "{rec}");
        })?;
        let test_fit = holdout_fitness(&best.mask, &train, &test, &spec.forest, k, seed)?;
        log::info!("seed {seed}: lgaffs test gm {:.4}", test_fit.gm);
        result.lgaffs = Some(record(&best, names, test_fit));
    }

    let mut front_path = None;
    if spec.algorithm.runs_pgaffs() {
        let front = run_pgaffs_with(&train, g, &spec.forest, |v| {
            let first: Vec<&Individual> = v
                .population
                .iter()
                .zip(v.rank)
                .filter(|(_, &r)| r == 0)
                .map(|(i, _)| i)
                .collect();
            let top = first
                .iter()
                .copied()
                .reduce(|a, b| if b.fitness().gm > a.fitness().gm { b } else { a })
                .expect("first front is non-empty");
            let rec = ProgressRecord {
                algorithm: "pgaffs".into(),
                generation: v.index,
                fitness: *top.fitness(),
                selected: top.mask.count_ones(),
                front_size: first.len(),
            };
            let _ = writeln!(progress, "{rec}");
        })?;
        let mut records = Vec::with_capacity(front.len());
        for ind in &front {
            let test_fit = holdout_fitness(&ind.mask, &train, &test, &spec.forest, k, seed)?;
            records.push(record(ind, names, test_fit));
        }
        let pick = filter_index(&records, &spec.lexico)?;
        result.pgaffs_filtered = Some(records[pick].clone());
        let path = out_dir.join(format!("front_seed{seed}.csv"));
        write_file(&path, &front_csv(&records))?;
        front_path = Some(path);
        result.pareto_front = records;
    }

    result.spec = Some(serde_json::to_value(&resolved).map_err(|e| Error::Parse(e.to_string()))?);
    let stem = format!("{}_{}", slug(&config.dataset_id), slug(&config.sensitive_id));
    let result_path = out_dir.join(format!("result_{stem}_seed{seed}.json"));
    let progress_path = out_dir.join(format!("progress_seed{seed}.tsv"));
    write_file(&progress_path, &progress)?;
    write_file(&result_path, &result.to_json())?;
    Ok(SeedArtifacts {
        seed,
        result: result_path,
        progress: progress_path,
        front: front_path,
    })
}

/// Reads result artifacts (`.json`) or published measure tables (`.csv`)
/// and builds the comparison report, written to `out_dir` when given.
/// Mixing the two input kinds, or results with and without Pareto fronts,
/// is rejected.
pub fn cmd_compare(paths: &[PathBuf], lp: &LexicoParams, out_dir: Option<&Path>) -> Result<ComparisonReport> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("no result files given".into()));
    }
    let is_table = |p: &PathBuf| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let tables = paths.iter().filter(|p| is_table(p)).count();
    if tables != 0 && tables != paths.len() {
        return Err(Error::MalformedResult {
            path: paths[0].clone(),
            reason: "mixed schemas: measure tables and result files cannot be combined".into(),
        });
    }
    let mut results = Vec::new();
    for p in paths {
        if is_table(p) {
            results.extend(read_measure_table_file(p)?);
        } else {
            results.push(ProblemResult::read(p)?);
        }
    }
    let with_front = results.iter().filter(|r| !r.pareto_front.is_empty()).count();
    if with_front != 0 && with_front != results.len() {
        return Err(Error::MalformedResult {
            path: paths[0].clone(),
            reason: "mixed schemas: some results carry a Pareto front and some do not".into(),
        });
    }
    let report = build_report(&results, lp)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let rows = dir.join("comparison_rows.csv");
        let summary = dir.join("comparison_summary.csv");
        let mut buf = Vec::new();
        report.write_rows_csv(&mut buf)?;
        fs::write(&rows, buf).map_err(|e| Error::io(&rows, e))?;
        let mut buf = Vec::new();
        report.write_summary_csv(&mut buf)?;
        fs::write(&summary, buf).map_err(|e| Error::io(&summary, e))?;
        write_file(&dir.join("comparison.json"), &report.to_json())?;
    }
    Ok(report)
}

/// Reads 0/1 predictions, one per line; a non-numeric first line is taken
/// as a header.
pub fn read_predictions(path: &Path) -> Result<Vec<u8>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t.parse::<f64>() {
            Ok(v) if v == 0.0 || v == 1.0 => out.push(v as u8),
            Err(_) if n == 0 => continue,
            _ => {
                return Err(Error::Parse(format!(
                    "{}:{}: prediction must be 0 or 1, got '{t}'",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    Ok(out)
}

/// The five measures of external predictions against a configured dataset.
/// Consistency uses all encoded features.
pub fn cmd_metrics(predictions: &Path, config_path: &Path, k: usize) -> Result<FitnessVector> {
    let config = DatasetConfig::from_toml_file(config_path)?;
    let data = load_configured(&config)?;
    let pred = read_predictions(predictions)?;
    if pred.len() != data.n_instances() {
        return Err(Error::LengthMismatch {
            expected: data.n_instances(),
            actual: pred.len(),
        });
    }
    score(&pred, data.y(), data.s(), data.x(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_defaults_and_fast_mode() {
        let s = ExperimentSpec::new("x.toml", vec![1]);
        assert_eq!(s.ga.population_size, 101);
        assert_eq!(s.test_fraction, 0.3);
        let f = s.fast();
        assert_eq!((f.ga.population_size, f.ga.max_iterations), (20, 10));
        assert_eq!((f.forest.n_trees, f.forest.max_depth), (10, 8));
        let json = serde_json::to_string(&f.for_seed(4)).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.ga.seed, 4);
        assert_eq!(back.seeds, vec![4]);
    }

    #[test]
    fn prediction_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        fs::write(&p, "prediction\n1\n0\n\n1\n").unwrap();
        assert_eq!(read_predictions(&p).unwrap(), vec![1, 0, 1]);
        fs::write(&p, "1\n2\n").unwrap();
        assert!(read_predictions(&p).is_err());
    }
}
