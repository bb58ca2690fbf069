//! `fairga`: run the fair feature-selection GAs, compare their results and
//! audit external predictions.
//!
//! The only environment variable read is `FAIRGA_THREADS`, the worker count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fairga::compare::ProblemResult;
use fairga::experiment::{cmd_compare, cmd_metrics, cmd_run, Algorithm, ExperimentSpec};
use fairga::lexico::LexicoParams;
use fairga::metrics::MEASURE_NAMES;

const THREADS_VAR: &str = "FAIRGA_THREADS";

#[derive(Parser)]
#[command(
    name = "fairga",
    version,
    about = "Lexicographic and Pareto GAs for fair feature selection"
)]
struct Cli {
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search, retrain and score on the held-out split, one artifact per seed.
    Run(Box<RunArgs>),
    /// Build win counts, Wilcoxon tests and domination statistics.
    Compare(CompareArgs),
    /// Score a predictions file against a configured dataset.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Lgaffs,
    Pgaffs,
    Both,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Lgaffs => Algorithm::Lgaffs,
            AlgorithmArg::Pgaffs => Algorithm::Pgaffs,
            AlgorithmArg::Both => Algorithm::Both,
        }
    }
}

#[derive(Args)]
struct LexicoArgs {
    #[arg(long)]
    accuracy_eps: Option<f64>,
    #[arg(long)]
    fairness_eps: Option<f64>,
    #[arg(long)]
    fair_rank_eps: Option<u32>,
    #[arg(long)]
    fair_test_eps: Option<u32>,
}

impl LexicoArgs {
    fn apply(&self, lp: &mut LexicoParams) {
        if let Some(v) = self.accuracy_eps {
            lp.accuracy_eps = v;
        }
        if let Some(v) = self.fairness_eps {
            lp.fairness_eps = v;
        }
        if let Some(v) = self.fair_rank_eps {
            lp.fair_rank_eps = v;
        }
        if let Some(v) = self.fair_test_eps {
            lp.fair_test_eps = v;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Dataset config (TOML).
    #[arg(long, required_unless_present = "spec")]
    config: Option<PathBuf>,
    /// Experiment spec (JSON), or a result artifact whose embedded spec is reused.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    /// Comma-separated master seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Small forest, population 20, 10 iterations.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    crossover: Option<f64>,
    #[arg(long)]
    mutation: Option<f64>,
    #[arg(long)]
    min_p: Option<f64>,
    #[arg(long)]
    max_p: Option<f64>,
    #[arg(long)]
    tournament: Option<usize>,
    /// Internal cross-validation folds.
    #[arg(long)]
    folds: Option<usize>,
    /// k of the consistency measure.
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[command(flatten)]
    lexico: LexicoArgs,
    /// Output directory; defaults to the spec's `output_dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Result artifacts (.json) or measure tables (.csv).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Directory for the report files.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    lexico: LexicoArgs,
}

#[derive(Args)]
struct MetricsArgs {
    /// One 0/1 prediction per line, in dataset row order.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 5)]
    neighbors: usize,
}

fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("schema").is_some() {
        let result = ProblemResult::from_json(&text, path)?;
        let spec = result
            .spec
            .with_context(|| format!("{} embeds no spec", path.display()))?;
        return Ok(serde_json::from_value(spec)?);
    }
    Ok(ExperimentSpec::from_json_file(path)?)
}

fn build_spec(a: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match (&a.spec, &a.config) {
        (Some(p), _) => load_spec(p)?,
        (None, Some(c)) => ExperimentSpec::new(c.clone(), Vec::new()),
        (None, None) => bail!("either --config or --spec is required"),
    };
    if let (Some(_), Some(c)) = (&a.spec, &a.config) {
        spec.dataset_config = c.clone();
    }
    if a.fast {
        spec = spec.fast();
    }
    if let Some(v) = a.algorithm {
        spec.algorithm = v.into();
    }
    if !a.seeds.is_empty() {
        spec.seeds = a.seeds.clone();
    }
    if spec.seeds.is_empty() {
        spec.seeds = vec![0];
    }
    let g = &mut spec.ga;
    let set = |dst: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut g.population_size, a.population);
    set(&mut g.max_iterations, a.iterations);
    set(&mut g.tournament_size, a.tournament);
    set(&mut g.folds, a.folds);
    set(&mut g.neighbors, a.neighbors);
    set(&mut spec.forest.n_trees, a.trees);
    set(&mut spec.forest.max_depth, a.depth);
    let setf = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    setf(&mut g.crossover_prob, a.crossover);
    setf(&mut g.mutation_prob, a.mutation);
    setf(&mut g.min_p, a.min_p);
    setf(&mut g.max_p, a.max_p);
    setf(&mut spec.test_fraction, a.test_fraction);
    a.lexico.apply(&mut spec.lexico);
    Ok(spec)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
    if n == 0 {
        bail!("{THREADS_VAR} must be a positive integer");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("{THREADS_VAR}={n} ignored: built without the parallel feature");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let spec = build_spec(&a)?;
            let out = a
                .out
                .clone()
                .or_else(|| spec.output_dir.clone())
                .context("no output directory: pass --out or set output_dir in the spec")?;
            let written = cmd_run(&spec, &out)?;
            log::info!("wrote {} result file(s) to {}", written.len(), out.display());
            for w in written {
                println!("seed {}: {}", w.seed, w.result.display());
            }
        }
        Command::Compare(a) => {
            let mut lp = LexicoParams::default();
            a.lexico.apply(&mut lp);
            let report = cmd_compare(&a.inputs, &lp, a.out.as_deref())?;
            println!(
                "{:<12} {:>12} {:>12} {:>6} {:>10}",
                "measure", "pgaffs_wins", "lgaffs_wins", "ties", "p_value"
            );
            for m in &report.measures {
                let p = m.p_value.map_or_else(|| "NA".to_string(), |p| format!("{p:.5}"));
                println!(
                    "{:<12} {:>12} {:>12} {:>6} {:>10}",
                    m.measure, m.wins.pgaffs, m.wins.lgaffs, m.wins.ties, p
                );
            }
        }
        Command::Metrics(a) => {
            let f = cmd_metrics(&a.predictions, &a.config, a.neighbors)?;
            for (name, v) in MEASURE_NAMES.iter().zip(f.to_array()) {
                println!("{name}\t{v:.6}");
            }
            if f.flags.degenerate {
                println!("# degenerate: a group-conditional rate had an empty denominator");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Err(e) = configure_threads().and_then(|()| run(cli)) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
