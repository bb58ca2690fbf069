//! Post-hoc comparison of the two GAs: the lexicographic filter over a
//! Pareto front, domination statistics, per-measure win counts and the
//! Wilcoxon signed-rank test.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::lexico::{lexicographic_top, Individual, LexicoParams};
use crate::mask::FeatureMask;
use crate::metrics::{FitnessVector, MEASURE_NAMES};
use crate::pareto::dominates;

/// Schema tag carried by every result artifact.
pub const RESULT_SCHEMA: &str = "fairga.problem-result";
pub const RESULT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA: &str = "fairga.comparison-report";

/// Largest effective sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 20;

/// Member of the Pareto front (or the lexicographic solution) with the
/// fitness used during search and the held-out measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<FeatureMask>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<FitnessVector>,
    pub test: FitnessVector,
}

impl SolutionRecord {
    pub fn test_only(test: FitnessVector) -> Self {
        SolutionRecord {
            mask: None,
            features: Vec::new(),
            train: None,
            test,
        }
    }

    /// Fitness the lexicographic filter ranks by: training fitness when
    /// recorded, test measures otherwise.
    pub fn ranking_fitness(&self) -> FitnessVector {
        self.train.unwrap_or(self.test)
    }
}

/// Outcome of one (dataset, sensitive feature, seed) problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub schema: String,
    pub schema_version: u32,
    pub dataset_id: String,
    pub sensitive_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lgaffs: Option<SolutionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pgaffs_filtered: Option<SolutionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pareto_front: Vec<SolutionRecord>,
    /// Fully resolved experiment specification that produced this result.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<serde_json::Value>,
}

impl ProblemResult {
    pub fn new(dataset_id: &str, sensitive_id: &str) -> Self {
        ProblemResult {
            schema: RESULT_SCHEMA.to_string(),
            schema_version: RESULT_SCHEMA_VERSION,
            dataset_id: dataset_id.to_string(),
            sensitive_id: sensitive_id.to_string(),
            seed: None,
            lgaffs: None,
            pgaffs_filtered: None,
            pareto_front: Vec::new(),
            spec: None,
        }
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let r: ProblemResult = serde_json::from_str(text).map_err(|e| Error::MalformedResult {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })?;
        if r.schema != RESULT_SCHEMA || r.schema_version != RESULT_SCHEMA_VERSION {
            return Err(Error::MalformedResult {
                path: origin.to_path_buf(),
                reason: format!(
                    "unsupported schema {} v{} (expected {RESULT_SCHEMA} v{RESULT_SCHEMA_VERSION})",
                    r.schema, r.schema_version
                ),
            });
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    /// The PGAFFS solution compared against LGAFFS: the stored filtered
    /// member, or the filter applied to the stored front.
    pub fn pgaffs_solution(&self, lp: &LexicoParams) -> Result<Option<SolutionRecord>> {
        if let Some(s) = &self.pgaffs_filtered {
            return Ok(Some(s.clone()));
        }
        if self.pareto_front.is_empty() {
            return Ok(None);
        }
        let i = filter_index(&self.pareto_front, lp)?;
        Ok(Some(self.pareto_front[i].clone()))
    }
}

/// Index of the lexicographic filter's pick among `front`.
pub fn filter_index(front: &[SolutionRecord], lp: &LexicoParams) -> Result<usize> {
    let pop: Vec<Individual> = front
        .iter()
        .map(|r| {
            Individual::evaluated(
                r.mask.clone().unwrap_or_else(|| FeatureMask::zeros(0)),
                r.ranking_fitness(),
            )
        })
        .collect();
    lexicographic_top(&pop, lp)
}

/// One solution from a front, chosen by the same scan as lexicographic
/// elitism.
pub fn lexicographic_filter<'a>(front: &'a [Individual], lp: &LexicoParams) -> Result<&'a Individual> {
    Ok(&front[lexicographic_top(front, lp)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationStats {
    /// Front members dominating the lexicographic solution.
    pub pgaffs_dominates: usize,
    /// Front members dominated by it.
    pub lgaffs_dominates: usize,
    pub no_domination: usize,
    /// Share of front members with gm at least the lexicographic gm.
    pub higher_accuracy_proportion: f64,
}

impl DominationStats {
    pub fn total(&self) -> usize {
        self.pgaffs_dominates + self.lgaffs_dominates + self.no_domination
    }
}

/// Pareto dominance over all five measures between `lex` and each front member.
pub fn domination_stats(lex: &FitnessVector, front: &[FitnessVector]) -> Result<DominationStats> {
    if front.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let l = lex.to_array();
    let mut stats = DominationStats {
        pgaffs_dominates: 0,
        lgaffs_dominates: 0,
        no_domination: 0,
        higher_accuracy_proportion: 0.0,
    };
    let mut higher = 0usize;
    for f in front {
        let v = f.to_array();
        if dominates(&v, &l) {
            stats.pgaffs_dominates += 1;
        } else if dominates(&l, &v) {
            stats.lgaffs_dominates += 1;
        } else {
            stats.no_domination += 1;
        }
        if f.gm >= lex.gm {
            higher += 1;
        }
    }
    stats.higher_accuracy_proportion = higher as f64 / front.len() as f64;
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    /// Every difference was zero.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonTest {
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// Sum of ranks of positive differences (`first - second`).
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Differences closer than this are one tie group (and below it, zero).
const TIE_SCALE: f64 = 1e12;

fn tie_key(v: f64) -> i64 {
    (v * TIE_SCALE).round() as i64
}

/// Average ranks (1-based) of `values`, grouping values with equal
/// [`tie_key`], plus the tie-group sizes.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| tie_key(values[i]));
    let mut ranks = vec![0.0; values.len()];
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let key = tie_key(values[order[start]]);
        let mut end = start;
        while end < order.len() && tie_key(values[order[end]]) == key {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        groups.push(end - start);
        start = end;
    }
    (ranks, groups)
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and tied magnitudes share their average rank. Up to
/// [`EXACT_MAX_N`] effective pairs the null distribution is enumerated
/// exactly; above it the tie-corrected normal approximation (without
/// continuity correction) is used. All-zero differences give p = 1.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonTest> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("wilcoxon test needs at least one pair".into()));
    }
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| a - b)
        .filter(|d| tie_key(d.abs()) != 0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonTest {
            n_effective: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Degenerate,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, groups) = average_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p_value(&ranks, w_plus), WilcoxonMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let z = (w_plus - mean) / var.sqrt();
        let normal = Normal::standard();
        ((2.0 * normal.sf(z.abs())).min(1.0), WilcoxonMethod::Normal)
    };
    Ok(WilcoxonTest {
        n_effective: n,
        w_plus,
        w_minus,
        p_value,
        method,
    })
}

/// Exact two-sided p-value: doubled ranks are integers, so the null
/// distribution of W+ over all 2^n sign assignments is a subset-sum count.
fn exact_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for t in (0..=reach).rev() {
            if counts[t] > 0 {
                counts[t + r] += counts[t];
            }
        }
        reach += r;
    }
    let w = (w_plus * 2.0).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: u64 = counts[..=w].iter().sum();
    let upper: u64 = counts[w..].iter().sum();
    (2.0 * lower.min(upper) as f64 / all).min(1.0)
}

/// Win tally for one measure, compared at four decimals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wins {
    pub pgaffs: usize,
    pub lgaffs: usize,
    pub ties: usize,
}

pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Counts the pairs where each side is strictly higher after rounding.
pub fn count_wins(pairs: &[(f64, f64)]) -> Wins {
    let mut w = Wins::default();
    for &(p, l) in pairs {
        let (p, l) = (tie_key(round4(p)), tie_key(round4(l)));
        match p.cmp(&l) {
            std::cmp::Ordering::Greater => w.pgaffs += 1,
            std::cmp::Ordering::Less => w.lgaffs += 1,
            std::cmp::Ordering::Equal => w.ties += 1,
        }
    }
    w
}

/// One row of the per-problem report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset_id: String,
    pub sensitive_id: String,
    pub seed: Option<u64>,
    pub pgaffs: FitnessVector,
    pub lgaffs: FitnessVector,
    pub pareto_size: usize,
    pub domination: Option<DominationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub measure: String,
    pub wins: Wins,
    /// `None` when fewer than two problems are compared.
    pub p_value: Option<f64>,
    pub test: Option<WilcoxonTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: String,
    pub schema_version: u32,
    pub problems: usize,
    pub measures: Vec<MeasureSummary>,
    pub rows: Vec<ReportRow>,
}

/// Wins, Wilcoxon p-values (PGAFFS minus LGAFFS) and domination statistics
/// over a set of problems. Every result needs both solutions.
pub fn build_report(results: &[ProblemResult], lp: &LexicoParams) -> Result<ComparisonReport> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("no results to compare".into()));
    }
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let missing = |what: &str| Error::MalformedResult {
            path: format!("{}/{}", r.dataset_id, r.sensitive_id).into(),
            reason: format!("no {what} solution"),
        };
        let lgaffs = r.lgaffs.as_ref().ok_or_else(|| missing("LGAFFS"))?;
        let pgaffs = r.pgaffs_solution(lp)?.ok_or_else(|| missing("PGAFFS"))?;
        let domination = if r.pareto_front.is_empty() {
            None
        } else {
            let front: Vec<FitnessVector> = r.pareto_front.iter().map(|s| s.test).collect();
            Some(domination_stats(&lgaffs.test, &front)?)
        };
        rows.push(ReportRow {
            dataset_id: r.dataset_id.clone(),
            sensitive_id: r.sensitive_id.clone(),
            seed: r.seed,
            pgaffs: pgaffs.test,
            lgaffs: lgaffs.test,
            pareto_size: r.pareto_front.len(),
            domination,
        });
    }
    let mut measures = Vec::with_capacity(MEASURE_NAMES.len());
    for (m, name) in MEASURE_NAMES.iter().enumerate() {
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .map(|row| (row.pgaffs.to_array()[m], row.lgaffs.to_array()[m]))
            .collect();
        let test = if pairs.len() >= 2 {
            Some(wilcoxon_signed_rank(&pairs)?)
        } else {
            None
        };
        measures.push(MeasureSummary {
            measure: name.to_string(),
            wins: count_wins(&pairs),
            p_value: test.map(|t| t.p_value),
            test,
        });
    }
    Ok(ComparisonReport {
        schema: REPORT_SCHEMA.to_string(),
        schema_version: RESULT_SCHEMA_VERSION,
        problems: rows.len(),
        measures,
        rows,
    })
}

impl ComparisonReport {
    pub fn measure(&self, name: &str) -> Option<&MeasureSummary> {
        self.measures.iter().find(|m| m.measure == name)
    }

    /// Per-problem rows: 10 measure columns (PGAFFS and LGAFFS per measure)
    /// and 4 domination columns, empty when no front was recorded.
    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["dataset".to_string(), "sensitive".to_string(), "seed".to_string()];
        for name in MEASURE_NAMES {
            header.push(format!("pgaffs_{name}"));
            header.push(format!("lgaffs_{name}"));
        }
        header.extend(
            [
                "pgaffs_dominates",
                "lgaffs_dominates",
                "no_domination",
                "higher_accuracy_proportion",
            ]
            .map(String::from),
        );
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.dataset_id.clone(),
                row.sensitive_id.clone(),
                row.seed.map(|s| s.to_string()).unwrap_or_default(),
            ];
            let (p, l) = (row.pgaffs.to_array(), row.lgaffs.to_array());
            for m in 0..MEASURE_NAMES.len() {
                rec.push(format!("{:.6}", p[m]));
                rec.push(format!("{:.6}", l[m]));
            }
            match &row.domination {
                Some(d) => rec.extend([
                    d.pgaffs_dominates.to_string(),
                    d.lgaffs_dominates.to_string(),
                    d.no_domination.to_string(),
                    format!("{:.6}", d.higher_accuracy_proportion),
                ]),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    /// Summary table: one line per measure with wins and p-value.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "measure",
            "pgaffs_wins",
            "lgaffs_wins",
            "ties",
            "n_effective",
            "p_value",
        ])
        .map_err(csv_err)?;
        for m in &self.measures {
            w.write_record([
                m.measure.clone(),
                m.wins.pgaffs.to_string(),
                m.wins.lgaffs.to_string(),
                m.wins.ties.to_string(),
                m.test.map(|t| t.n_effective.to_string()).unwrap_or_default(),
                m.p_value.map(|p| format!("{p:.6}")).unwrap_or_else(|| "NA".into()),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Deserialize)]
struct FixtureRow {
    dataset: String,
    sensitive: String,
    pgaffs_gm: f64,
    lgaffs_gm: f64,
    pgaffs_dp: f64,
    lgaffs_dp: f64,
    pgaffs_consistency: f64,
    lgaffs_consistency: f64,
    pgaffs_fperbs: f64,
    lgaffs_fperbs: f64,
    pgaffs_fnerbs: f64,
    lgaffs_fnerbs: f64,
}

/// Reads published per-problem test measures (one row per problem, a
/// `pgaffs_<measure>` and `lgaffs_<measure>` column per measure) as results
/// without Pareto fronts.
pub fn read_measure_table<R: Read>(reader: R) -> Result<Vec<ProblemResult>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<FixtureRow>() {
        let r = row.map_err(csv_err)?;
        let mut p = ProblemResult::new(&r.dataset, &r.sensitive);
        p.pgaffs_filtered = Some(SolutionRecord::test_only(FitnessVector::new(
            r.pgaffs_gm,
            r.pgaffs_dp,
            r.pgaffs_consistency,
            r.pgaffs_fperbs,
            r.pgaffs_fnerbs,
        )));
        p.lgaffs = Some(SolutionRecord::test_only(FitnessVector::new(
            r.lgaffs_gm,
            r.lgaffs_dp,
            r.lgaffs_consistency,
            r.lgaffs_fperbs,
            r.lgaffs_fnerbs,
        )));
        out.push(p);
    }
    Ok(out)
}

pub fn read_measure_table_file(path: &Path) -> Result<Vec<ProblemResult>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_measure_table(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn fv(v: f64) -> FitnessVector {
        FitnessVector::new(v, v, v, v, v)
    }

    /// Two-sided p-value by listing every sign assignment.
    fn enumerate_p(diffs: &[f64]) -> f64 {
        let nz: Vec<f64> = diffs.iter().copied().filter(|d| tie_key(d.abs()) != 0).collect();
        if nz.is_empty() {
            return 1.0;
        }
        let mags: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
        let (ranks, _) = average_ranks(&mags);
        let observed: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let n = nz.len();
        let (mut le, mut ge) = (0u64, 0u64);
        for signs in 0u64..(1 << n) {
            let w: f64 = (0..n).filter(|i| signs >> i & 1 == 1).map(|i| ranks[i]).sum();
            if w <= observed + 1e-9 {
                le += 1;
            }
            if w >= observed - 1e-9 {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
    }

    #[test]
    fn wilcoxon_small_exact() {
        let t = wilcoxon_signed_rank(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert_eq!(t.method, WilcoxonMethod::Exact);
        assert_eq!(t.p_value, 0.25);
        let t = wilcoxon_signed_rank(&[(0.5, 0.5), (0.2, 0.2)]).unwrap();
        assert_eq!((t.p_value, t.method), (1.0, WilcoxonMethod::Degenerate));
        assert!(wilcoxon_signed_rank(&[]).is_err());
    }

    #[test]
    fn wilcoxon_exact_matches_enumeration() {
        let mut rng = rng_from_seed(17);
        for _ in 0..300 {
            let n = rng.gen_range(1..=12);
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    (
                        f64::from(rng.gen_range(0..6u8)) / 4.0,
                        f64::from(rng.gen_range(0..6u8)) / 4.0,
                    )
                })
                .collect();
            let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
            let t = wilcoxon_signed_rank(&pairs).unwrap();
            assert!((t.p_value - enumerate_p(&diffs)).abs() < 1e-12, "{pairs:?}");
            let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
            assert_eq!(t.p_value, wilcoxon_signed_rank(&swapped).unwrap().p_value);
        }
    }

    #[test]
    fn domination_examples() {
        let lex = fv(0.8);
        let front = [fv(0.9), fv(0.7), FitnessVector::new(0.9, 0.7, 0.8, 0.8, 0.8)];
        let s = domination_stats(&lex, &front).unwrap();
        assert_eq!((s.pgaffs_dominates, s.lgaffs_dominates, s.no_domination), (1, 1, 1));
        assert!((s.higher_accuracy_proportion - 2.0 / 3.0).abs() < 1e-12);

        let s = domination_stats(&lex, &[lex]).unwrap();
        assert_eq!((s.pgaffs_dominates, s.lgaffs_dominates, s.no_domination), (0, 0, 1));
        assert_eq!(s.higher_accuracy_proportion, 1.0);

        let s = domination_stats(&lex, &[fv(0.1), fv(0.2)]).unwrap();
        assert_eq!((s.pgaffs_dominates, s.lgaffs_dominates, s.no_domination), (0, 2, 0));
        assert_eq!(s.higher_accuracy_proportion, 0.0);
        assert!(domination_stats(&lex, &[]).is_err());
    }

    #[test]
    fn filter_examples() {
        let lp = LexicoParams::default();
        let one = [Individual::evaluated(FeatureMask::ones(2), fv(0.3))];
        assert_eq!(lexicographic_filter(&one, &lp).unwrap(), &one[0]);

        let a = Individual::evaluated(FeatureMask::ones(2), FitnessVector::new(0.6, 1.0, 1.0, 1.0, 1.0));
        let b = Individual::evaluated(FeatureMask::zeros(2), FitnessVector::new(0.9, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(lexicographic_filter(&[a.clone(), b.clone()], &lp).unwrap(), &b);

        let c = Individual::evaluated(FeatureMask::ones(2), FitnessVector::new(0.705, 0.9, 0.9, 0.9, 0.9));
        let d = Individual::evaluated(FeatureMask::zeros(2), FitnessVector::new(0.70, 0.5, 0.5, 0.5, 0.5));
        assert_eq!(lexicographic_filter(&[d, c.clone()], &lp).unwrap(), &c);
    }

    fn problem(p: FitnessVector, l: FitnessVector) -> ProblemResult {
        let mut r = ProblemResult::new("d", "s");
        r.pgaffs_filtered = Some(SolutionRecord::test_only(p));
        r.lgaffs = Some(SolutionRecord::test_only(l));
        r
    }

    #[test]
    fn report_degenerate_cases() {
        let lp = LexicoParams::default();
        let rep = build_report(&[problem(fv(0.2), fv(0.9))], &lp).unwrap();
        for m in &rep.measures {
            assert_eq!(
                m.wins,
                Wins {
                    pgaffs: 0,
                    lgaffs: 1,
                    ties: 0
                }
            );
            assert_eq!(m.p_value, None);
        }
        let same = vec![problem(fv(0.5), fv(0.5)); 4];
        let rep = build_report(&same, &lp).unwrap();
        for m in &rep.measures {
            assert_eq!(m.wins.ties, 4);
            assert_eq!(m.p_value, Some(1.0));
        }
        assert!(build_report(&[], &lp).is_err());
        assert!(build_report(&[ProblemResult::new("d", "s")], &lp).is_err());
    }

    #[test]
    fn report_filters_stored_front() {
        let mut r = ProblemResult::new("d", "s");
        r.lgaffs = Some(SolutionRecord::test_only(fv(0.5)));
        r.pareto_front = vec![
            SolutionRecord {
                train: Some(fv(0.9)),
                ..SolutionRecord::test_only(fv(0.4))
            },
            SolutionRecord {
                train: Some(fv(0.2)),
                ..SolutionRecord::test_only(fv(0.95))
            },
        ];
        let rep = build_report(&[r], &LexicoParams::default()).unwrap();
        assert_eq!(rep.rows[0].pgaffs, fv(0.4));
        let d = rep.rows[0].domination.unwrap();
        assert_eq!((d.pgaffs_dominates, d.lgaffs_dominates, d.total()), (1, 1, 2));
        let mut buf = Vec::new();
        rep.write_rows_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 3 + 10 + 4);
    }

    #[test]
    fn result_json_round_trip_and_schema_check() {
        let r = problem(fv(0.2), fv(0.3));
        let back = ProblemResult::from_json(&r.to_json(), Path::new("x")).unwrap();
        assert_eq!(back, r);
        let bad = r.to_json().replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(ProblemResult::from_json(&bad, Path::new("x")).is_err());
        assert!(ProblemResult::from_json("{", Path::new("x")).is_err());
    }
}
