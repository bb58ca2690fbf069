//! Tabular ingestion: CSV parsing, categorical encoding, min-max scaling,
//! binarization of class and sensitive columns, and deterministic
//! train/test and cross-validation fold plans.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, stream};

/// Header + rows of raw text cells. `None` marks a missing cell
/// (empty or `?` in the source file).
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

/// Typed view of a raw cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Text(&'a str),
    Missing,
}

fn parse_cell(raw: &str) -> Option<String> {
    let t = raw.trim();
    if t.is_empty() || t == "?" {
        None
    } else {
        Some(t.to_string())
    }
}

impl RawTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<Self> {
        if columns.len() < 2 {
            return Err(Error::Parse(format!(
                "need at least 2 columns (features + class), found {}",
                columns.len()
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(Error::Parse(format!(
                "row {} has {} cells, header has {}",
                i + 1,
                row.len(),
                columns.len()
            )));
        }
        Ok(RawTable { columns, rows })
    }

    pub fn from_reader<R: Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() == 1 && record[0].trim().is_empty() {
                continue;
            }
            rows.push(record.iter().map(parse_cell).collect());
        }
        RawTable::new(columns, rows)
    }

    pub fn read_csv(path: &Path, delimiter: u8) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file), delimiter)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn raw(&self, row: usize, col: usize) -> Option<&str> {
        self.rows[row][col].as_deref()
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell<'_> {
        match self.raw(row, col) {
            None => Cell::Missing,
            Some(t) => t.parse::<f64>().map(Cell::Number).unwrap_or(Cell::Text(t)),
        }
    }
}

/// How a categorical (or forced) column becomes numeric features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One-hot up to `max_onehot_levels` distinct values, ordinal above.
    #[default]
    Auto,
    OneHot,
    Ordinal,
    /// Parse as numbers; non-numeric cells are an error.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Median for numeric columns, mode for categorical ones.
    #[default]
    Impute,
    DropRows,
}

fn default_delimiter() -> char {
    ','
}

fn default_max_onehot() -> usize {
    20
}

/// One (dataset, sensitive feature) classification problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub dataset_id: String,
    #[serde(default)]
    pub sensitive_id: String,
    /// Data file, relative paths resolved against the config file's directory.
    #[serde(default)]
    pub data_path: Option<PathBuf>,
    pub class_column: String,
    pub positive_value: String,
    pub sensitive_column: String,
    /// Sensitive values mapped to the protected group (s = 1).
    #[serde(default)]
    pub protected_values: Vec<String>,
    /// Numeric alternative: sensitive values strictly below this are protected.
    #[serde(default)]
    pub protected_below: Option<f64>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default = "default_max_onehot")]
    pub max_onehot_levels: usize,
    #[serde(default)]
    pub column_encoding: BTreeMap<String, Encoding>,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
    #[serde(default)]
    pub include_sensitive: bool,
    #[serde(default)]
    pub exclude_columns: Vec<String>,
}

impl DatasetConfig {
    pub fn new(class_column: &str, positive_value: &str, sensitive_column: &str) -> Self {
        DatasetConfig {
            dataset_id: String::new(),
            sensitive_id: String::new(),
            data_path: None,
            class_column: class_column.to_string(),
            positive_value: positive_value.to_string(),
            sensitive_column: sensitive_column.to_string(),
            protected_values: Vec::new(),
            protected_below: None,
            delimiter: default_delimiter(),
            encoding: Encoding::Auto,
            max_onehot_levels: default_max_onehot(),
            column_encoding: BTreeMap::new(),
            missing_policy: MissingPolicy::Impute,
            include_sensitive: false,
            exclude_columns: Vec::new(),
        }
    }

    pub fn with_protected_values<I, S>(mut self, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.protected_values = values.into_iter().map(Into::into).collect();
        self
    }

    /// Reads a TOML config; a relative `data_path` is resolved against the
    /// config's own directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: DatasetConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(p) = &cfg.data_path {
            if p.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                cfg.data_path = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        match (self.protected_values.is_empty(), self.protected_below) {
            (true, None) => Err(Error::Config(
                "one of protected_values or protected_below is required".into(),
            )),
            (false, Some(_)) => Err(Error::Config(
                "protected_values and protected_below are mutually exclusive".into(),
            )),
            _ if !self.delimiter.is_ascii() => Err(Error::Config("delimiter must be a single ASCII character".into())),
            _ => Ok(()),
        }
    }

    fn is_positive(&self, value: &str) -> bool {
        values_match(value, &self.positive_value)
    }

    fn is_protected(&self, value: &str) -> Result<bool> {
        match self.protected_below {
            Some(t) => value.parse::<f64>().map(|v| v < t).map_err(|_| {
                Error::Parse(format!(
                    "sensitive value '{value}' is not numeric but protected_below is set"
                ))
            }),
            None => Ok(self.protected_values.iter().any(|p| values_match(value, p))),
        }
    }
}

/// Text equality, or numeric equality when both sides parse ("1" == "1.0").
fn values_match(a: &str, b: &str) -> bool {
    let (a, b) = (a.trim(), b.trim());
    if a == b {
        return true;
    }
    matches!((a.parse::<f64>(), b.parse::<f64>()), (Ok(x), Ok(y)) if x == y)
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(columns.iter().map(|&c| row[c]));
        }
        FeatureMatrix {
            rows: self.rows,
            cols: columns.len(),
            data,
        }
    }
}

/// Encoded, normalized classification problem with binary class and group.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: FeatureMatrix,
    y: Vec<u8>,
    s: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: FeatureMatrix, y: Vec<u8>, s: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let n = x.n_rows();
        for len in [y.len(), s.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if feature_names.len() != x.n_cols() {
            return Err(Error::LengthMismatch {
                expected: x.n_cols(),
                actual: feature_names.len(),
            });
        }
        if x.n_cols() == 0 {
            return Err(Error::InvalidParameter("dataset has no features".into()));
        }
        if let Some(v) = x.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("feature value {v} outside [0, 1]")));
        }
        if y.iter().chain(&s).any(|&v| v > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        if !(y.contains(&0) && y.contains(&1)) {
            return Err(Error::SingleClass);
        }
        if !(s.contains(&0) && s.contains(&1)) {
            return Err(Error::EmptyGroup);
        }
        Ok(Dataset { x, y, s, feature_names })
    }

    pub fn x(&self) -> &FeatureMatrix {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn s(&self) -> &[u8] {
        &self.s
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_instances(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.x.select_rows(indices),
            indices.iter().map(|&i| self.y[i]).collect(),
            indices.iter().map(|&i| self.s[i]).collect(),
            self.feature_names.clone(),
        )
    }

    /// Writes the encoded dataset as CSV: one column per feature, then the
    /// class and group columns named by [`ENCODED_CLASS`] / [`ENCODED_GROUP`].
    /// Loading it back with [`Dataset::encoded_config`] reproduces X, y and s.
    pub fn write_encoded_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend([ENCODED_CLASS, ENCODED_GROUP]);
        w.write_record(&header).map_err(io)?;
        for i in 0..self.n_instances() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.y[i].to_string());
            rec.push(self.s[i].to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    /// Config that re-loads the output of [`Dataset::write_encoded_csv`].
    pub fn encoded_config() -> DatasetConfig {
        let mut cfg = DatasetConfig::new(ENCODED_CLASS, "1", ENCODED_GROUP).with_protected_values(["1"]);
        cfg.encoding = Encoding::Numeric;
        cfg
    }
}

pub const ENCODED_CLASS: &str = "__class__";
pub const ENCODED_GROUP: &str = "__group__";

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn min_max_scale(column: &mut [f64]) {
    let (lo, hi) = column.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        for v in column.iter_mut() {
            *v = (*v - lo) / (hi - lo);
        }
    } else {
        column.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Encodes a raw table into a [`Dataset`] under `config`.
pub fn encode_table(table: &RawTable, config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let class_col = table.column_index(&config.class_column)?;
    let sens_col = table.column_index(&config.sensitive_column)?;
    let mut excluded = BTreeSet::new();
    for name in &config.exclude_columns {
        excluded.insert(table.column_index(name)?);
    }
    for name in config.column_encoding.keys() {
        table.column_index(name)?;
    }
    let feature_cols: Vec<usize> = (0..table.columns().len())
        .filter(|&c| c != class_col && !excluded.contains(&c))
        .filter(|&c| c != sens_col || config.include_sensitive)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Config("no feature columns left".into()));
    }

    let rows: Vec<usize> = (0..table.n_rows())
        .filter(|&r| table.raw(r, class_col).is_some() && table.raw(r, sens_col).is_some())
        .filter(|&r| {
            config.missing_policy == MissingPolicy::Impute || feature_cols.iter().all(|&c| table.raw(r, c).is_some())
        })
        .collect();

    let y: Vec<u8> = rows
        .iter()
        .map(|&r| u8::from(config.is_positive(table.raw(r, class_col).unwrap_or_default())))
        .collect();
    let s: Vec<u8> = rows
        .iter()
        .map(|&r| {
            config
                .is_protected(table.raw(r, sens_col).unwrap_or_default())
                .map(u8::from)
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for &c in &feature_cols {
        let name = &table.columns()[c];
        let policy = config.column_encoding.get(name).copied().unwrap_or(config.encoding);
        let cells: Vec<Option<&str>> = rows.iter().map(|&r| table.raw(r, c)).collect();
        let parsed: Vec<Option<f64>> = cells.iter().map(|c| c.and_then(|t| t.parse::<f64>().ok())).collect();
        let numeric = cells.iter().zip(&parsed).all(|(c, p)| c.is_none() || p.is_some());
        let treat_numeric = match policy {
            Encoding::Numeric if !numeric => return Err(Error::Config(format!("column '{name}' is not numeric"))),
            Encoding::Numeric => true,
            Encoding::Auto => numeric,
            Encoding::OneHot | Encoding::Ordinal => false,
        };
        if treat_numeric {
            let mut present: Vec<f64> = parsed.iter().flatten().copied().collect();
            let fill = median(&mut present);
            columns.push(parsed.iter().map(|p| p.unwrap_or(fill)).collect());
            names.push(name.clone());
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in cells.iter().flatten() {
            *counts.entry(t).or_default() += 1;
        }
        // Mode, ties to the lexicographically smallest level.
        let mode = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (&k, &n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((k, n)),
            })
            .map(|(k, _)| k)
            .unwrap_or("");
        let filled: Vec<&str> = cells.iter().map(|c| c.unwrap_or(mode)).collect();
        let levels: Vec<&str> = filled.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let one_hot = match policy {
            Encoding::OneHot => true,
            Encoding::Ordinal => false,
            _ => levels.len() <= config.max_onehot_levels,
        };
        if one_hot {
            for level in &levels {
                columns.push(filled.iter().map(|v| f64::from(u8::from(v == level))).collect());
                names.push(format!("{name}={level}"));
            }
        } else {
            columns.push(
                filled
                    .iter()
                    .map(|v| levels.binary_search(v).unwrap_or(0) as f64)
                    .collect(),
            );
            names.push(name.clone());
        }
    }
    for col in &mut columns {
        min_max_scale(col);
    }
    let n = rows.len();
    let mut data = Vec::with_capacity(n * columns.len());
    for r in 0..n {
        data.extend(columns.iter().map(|c| c[r]));
    }
    let x = FeatureMatrix::new(n, columns.len(), data)?;
    Dataset::new(x, y, s, names)
}

/// Loads and encodes a delimited file.
pub fn load_csv(path: &Path, config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let table = RawTable::read_csv(path, config.delimiter as u8)?;
    encode_table(&table, config)
}

/// Loads the file named by `config.data_path`.
pub fn load_configured(config: &DatasetConfig) -> Result<Dataset> {
    let path = config
        .data_path
        .as_deref()
        .ok_or_else(|| Error::Config("data_path is not set".into()))?;
    load_csv(path, config)
}

/// Test-set size for a split: `round(n * fraction)`.
fn test_count(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_test = (n as f64 * fraction).round() as usize;
    if n_test < 2 || n - n_test.min(n) < 2 {
        return Err(Error::InvalidParameter(format!(
            "test fraction {fraction} on {n} instances leaves a side with fewer than 2 instances"
        )));
    }
    Ok(n_test)
}

/// Stratified (y, s) split of instance indices into (train, test), both
/// sorted ascending.
pub fn split_indices(y: &[u8], s: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = y.len();
    if s.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: s.len(),
        });
    }
    let n_test = test_count(n, fraction)?;
    let mut strata: [Vec<usize>; 4] = Default::default();
    for i in 0..n {
        strata[usize::from(y[i]) * 2 + usize::from(s[i])].push(i);
    }
    // Largest-remainder allocation of the test quota across strata.
    let mut quota: Vec<usize> = strata.iter().map(|g| g.len() * n_test / n).collect();
    let mut remainders: Vec<(usize, usize)> = strata
        .iter()
        .enumerate()
        .map(|(k, g)| (g.len() * n_test % n, k))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = n_test - quota.iter().sum::<usize>();
    for &(_, k) in remainders.iter().take(short) {
        quota[k] += 1;
    }

    let mut rng = derive_rng(seed, &[stream::SPLIT]);
    let (mut train, mut test) = (Vec::with_capacity(n - n_test), Vec::with_capacity(n_test));
    for (group, &q) in strata.iter_mut().zip(&quota) {
        group.shuffle(&mut rng);
        test.extend_from_slice(&group[..q]);
        train.extend_from_slice(&group[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded hold-out split stratified on the joint (class, group) label.
pub fn train_test_split(d: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d.y(), d.s(), fraction, seed)?;
    Ok((d.subset(&train)?, d.subset(&test)?))
}

/// Assignment of instances to `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    /// Class-stratified folds: each class is shuffled, the classes are laid
    /// end to end, and positions are dealt round-robin.
    pub fn stratified(labels: &[u8], k: usize, seed: u64) -> Result<Self> {
        let n = labels.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!("fold count must be >= 2, got {k}")));
        }
        if k > n {
            return Err(Error::InvalidParameter(format!(
                "fold count {k} exceeds instance count {n}"
            )));
        }
        let mut rng = derive_rng(seed, &[stream::FOLDS]);
        let mut order = Vec::with_capacity(n);
        for class in [0u8, 1] {
            let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            order.extend(members);
        }
        let mut assignment = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            assignment[i] = pos % k;
        }
        Ok(FoldPlan { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_instances(&self) -> usize {
        self.assignment.len()
    }

    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn make_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::stratified(d.y(), k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> RawTable {
        RawTable::from_reader(text.as_bytes(), b',').unwrap()
    }

    #[test]
    fn class_and_group_mapping_follow_row_order() {
        let t = table("age,sex,label\n30,m,yes\n40,f,no\n50,m,yes\n");
        let cfg = DatasetConfig::new("label", "yes", "sex").with_protected_values(["f"]);
        let d = encode_table(&t, &cfg).unwrap();
        assert_eq!(d.y(), &[1, 0, 1]);
        assert_eq!(d.s(), &[0, 1, 0]);
        assert_eq!(d.feature_names(), &["age".to_string()]);
        assert_eq!(d.x().values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn single_valued_sensitive_column_is_rejected() {
        let t = table("a,sex,label\n1,m,1\n2,m,0\n");
        let cfg = DatasetConfig::new("label", "1", "sex").with_protected_values(["f"]);
        let err = encode_table(&t, &cfg).unwrap_err();
        assert_eq!(err.to_string(), "empty protected or unprotected group");
    }

    #[test]
    fn single_class_and_unknown_columns() {
        let t = table("a,sex,label\n1,m,1\n2,f,1\n");
        let cfg = DatasetConfig::new("label", "1", "sex").with_protected_values(["f"]);
        assert!(matches!(encode_table(&t, &cfg), Err(Error::SingleClass)));
        let cfg = DatasetConfig::new("target", "1", "sex").with_protected_values(["f"]);
        assert!(matches!(encode_table(&t, &cfg), Err(Error::UnknownColumn(c)) if c == "target"));
    }

    #[test]
    fn ragged_rows_fail_to_parse() {
        let r = RawTable::from_reader("a,b,c\n1,2\n".as_bytes(), b',');
        assert!(matches!(r, Err(Error::Parse(_))));
    }

    #[test]
    fn categorical_encoding_and_imputation() {
        let t = table("color,size,grp,label\nred,1,a,1\nblue,?,b,0\nred,3,a,0\n,5,b,1\n");
        let cfg = DatasetConfig::new("label", "1", "grp").with_protected_values(["b"]);
        let d = encode_table(&t, &cfg).unwrap();
        assert_eq!(d.feature_names(), &["color=blue", "color=red", "size"]);
        // missing color -> mode "red"; missing size -> median(1,3,5) = 3
        assert_eq!(d.x().row(1), &[1.0, 0.0, 0.5]);
        assert_eq!(d.x().row(3), &[0.0, 1.0, 1.0]);

        let t = table("color,size,grp,label\nred,1,a,1\nblue,?,b,0\nred,3,a,0\n,5,b,1\nblue,2,b,0\n");
        let mut cfg = cfg;
        cfg.column_encoding.insert("color".into(), Encoding::Ordinal);
        cfg.missing_policy = MissingPolicy::DropRows;
        let d = encode_table(&t, &cfg).unwrap();
        assert_eq!(d.s(), &[0, 0, 1]);
        assert_eq!(d.n_instances(), 3);
        assert_eq!(d.feature_names(), &["color", "size"]);
    }

    #[test]
    fn constant_columns_become_zero_and_threshold_protection() {
        let t = table("k,age,label\n7,20,1\n7,30,0\n7,24,0\n");
        let mut cfg = DatasetConfig::new("label", "1", "age");
        cfg.protected_below = Some(25.0);
        let d = encode_table(&t, &cfg).unwrap();
        assert_eq!(d.s(), &[1, 0, 1]);
        assert_eq!(d.x().values(), &[0.0, 0.0, 0.0]);
        cfg.include_sensitive = true;
        let d = encode_table(&t, &cfg).unwrap();
        assert_eq!(d.feature_names(), &["k", "age"]);
    }

    #[test]
    fn config_requires_exactly_one_protection_rule() {
        let t = table("a,sex,label\n1,m,1\n2,f,0\n");
        let cfg = DatasetConfig::new("label", "1", "sex");
        assert!(matches!(encode_table(&t, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let y = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let s = [0, 0, 1, 1, 0, 0, 1, 1, 0, 1];
        let (tr, te) = split_indices(&y, &s, 0.3, 11).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        assert_eq!(split_indices(&y, &s, 0.3, 11).unwrap(), (tr.clone(), te.clone()));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(split_indices(&y, &s, 0.99, 11).is_err());
        assert!(split_indices(&y, &s, 0.0, 11).is_err());
        assert!(split_indices(&y, &s, 1.0, 11).is_err());
    }

    #[test]
    fn fold_sizes() {
        let labels9 = [0, 1, 0, 1, 0, 1, 0, 1, 0];
        assert_eq!(FoldPlan::stratified(&labels9, 3, 1).unwrap().sizes(), vec![3, 3, 3]);
        let labels10 = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let plan = FoldPlan::stratified(&labels10, 3, 1).unwrap();
        assert_eq!(plan.sizes(), vec![4, 3, 3]);
        for f in 0..3 {
            let held = plan.held_out(f);
            assert!(held.iter().any(|&i| labels10[i] == 0));
            assert!(held.iter().any(|&i| labels10[i] == 1));
            assert_eq!(held.len() + plan.training(f).len(), 10);
        }
        assert!(FoldPlan::stratified(&labels10, 1, 1).is_err());
        assert!(FoldPlan::stratified(&labels10[..2], 3, 1).is_err());
    }
}
