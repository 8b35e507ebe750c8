//! Loading, encoding and splitting tabular datasets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use log::{info, warn};
use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::deletion::round_count;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Tokens treated as a missing value (after trimming).
const MISSING_TOKENS: [&str; 2] = ["", "?"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn categorical(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Categorical,
        }
    }

    pub fn numeric(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
        }
    }
}

/// Column layout of a dataset: kinds, target and the QID feature columns.
///
/// Only the columns listed here are read from a CSV file; any other columns
/// in the file are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
    target: String,
    feature_columns: Vec<String>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, target: &str, feature_columns: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column {:?}", c.name)));
            }
        }
        if !seen.contains(target) {
            return Err(Error::Schema(format!("target {target:?} is not a column")));
        }
        let mut features = BTreeSet::new();
        for f in &feature_columns {
            if f == target {
                return Err(Error::Schema(format!("target {target:?} listed as a feature")));
            }
            if !seen.contains(f.as_str()) {
                return Err(Error::Schema(format!("feature {f:?} is not a column")));
            }
            if !features.insert(f.as_str()) {
                return Err(Error::Schema(format!("feature {f:?} listed twice")));
            }
        }
        Ok(Schema {
            columns,
            target: target.to_string(),
            feature_columns,
        })
    }

    /// Builds a schema from a CSV header by sniffing column kinds: a column
    /// whose non-missing values all parse as finite numbers is numeric.
    /// Every non-target column becomes a feature.
    pub fn infer_from_csv(path: &Path, target: &str) -> Result<Self> {
        let mut reader = csv_reader(path)?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut numeric = vec![true; header.len()];
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            for (j, field) in record.iter().enumerate().take(header.len()) {
                if numeric[j] && !is_missing(field) && parse_finite(field).is_none() {
                    numeric[j] = false;
                }
            }
        }
        let columns = header
            .iter()
            .zip(&numeric)
            .map(|(name, &is_num)| ColumnSpec {
                name: name.clone(),
                kind: if is_num && name != target {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                },
            })
            .collect();
        let features = header.iter().filter(|h| *h != target).cloned().collect();
        Schema::new(columns, target, features)
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn feature_columns(&self) -> &[String] {
        &self.feature_columns
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn kind_of(&self, name: &str) -> Option<ColumnKind> {
        self.index_of(name).map(|i| self.columns[i].kind)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Categorical(Vec<String>),
    Numeric(Vec<f64>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Categorical(v) => v.len(),
            ColumnData::Numeric(v) => v.len(),
        }
    }

    fn select(&self, positions: &[usize]) -> ColumnData {
        match self {
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(positions.iter().map(|&i| v[i].clone()).collect())
            }
            ColumnData::Numeric(v) => ColumnData::Numeric(positions.iter().map(|&i| v[i]).collect()),
        }
    }

    /// String form of one cell; numerics use Rust's shortest round-trip format.
    pub fn text(&self, row: usize) -> String {
        match self {
            ColumnData::Categorical(v) => v[row].clone(),
            ColumnData::Numeric(v) => format_number(v[row]),
        }
    }
}

fn format_number(x: f64) -> String {
    format!("{x}")
}

/// A raw tabular dataset, stored column-wise.
///
/// Rows carry stable ids (`0..n` at load time) that survive deletion, so a
/// reduced dataset can always be related back to the original file.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<ColumnData>,
    row_ids: Vec<usize>,
    dropped_rows: usize,
}

impl Dataset {
    /// Reads an RFC-4180 CSV with a header row.
    ///
    /// Every schema column must appear in the header (in any order); extra
    /// columns are skipped. Records with a missing value (`""` or `"?"`) in
    /// any schema column are dropped and counted in [`Dataset::dropped_rows`].
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
            ));
        }
        let mut reader = csv_reader(path)?;
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let mut positions: HashMap<&str, usize> = HashMap::new();
        for (i, h) in header.iter().enumerate() {
            if positions.insert(h, i).is_some() {
                return Err(Error::HeaderMismatch(format!("duplicate header column {h:?}")));
            }
        }
        let mut source = Vec::with_capacity(schema.columns.len());
        for c in &schema.columns {
            match positions.get(c.name.as_str()) {
                Some(&i) => source.push(i),
                None => {
                    return Err(Error::HeaderMismatch(format!(
                        "column {:?} not found in header of {}",
                        c.name,
                        path.display()
                    )))
                }
            }
        }

        let mut columns: Vec<ColumnData> = schema
            .columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
                ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
            })
            .collect();
        let mut dropped = 0;
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            let fields: Vec<&str> = source.iter().map(|&i| record.get(i).unwrap_or("")).collect();
            if fields.iter().any(|f| is_missing(f)) {
                dropped += 1;
                continue;
            }
            for ((col, spec), field) in columns.iter_mut().zip(&schema.columns).zip(&fields) {
                match col {
                    ColumnData::Categorical(v) => v.push(field.to_string()),
                    ColumnData::Numeric(v) => {
                        let x = parse_finite(field).ok_or_else(|| Error::NonNumeric {
                            column: spec.name.clone(),
                            value: field.to_string(),
                            line,
                        })?;
                        v.push(x);
                    }
                }
            }
        }
        let n = columns.first().map_or(0, ColumnData::len);
        if n == 0 {
            return Err(Error::ZeroRows);
        }
        if dropped > 0 {
            info!("{}: dropped {dropped} incomplete rows, kept {n}", path.display());
        }
        Ok(Dataset {
            schema: schema.clone(),
            columns,
            row_ids: (0..n).collect(),
            dropped_rows: dropped,
        })
    }

    /// Builds a dataset from in-memory columns (one entry per schema column,
    /// in schema order).
    pub fn from_columns(schema: Schema, columns: Vec<ColumnData>) -> Result<Self> {
        if columns.len() != schema.columns.len() {
            return Err(Error::Schema(format!(
                "expected {} columns, got {}",
                schema.columns.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, ColumnData::len);
        for (col, spec) in columns.iter().zip(&schema.columns) {
            if col.len() != n {
                return Err(Error::Schema(format!("column {:?} has a different length", spec.name)));
            }
            match (col, spec.kind) {
                (ColumnData::Numeric(v), ColumnKind::Numeric) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Schema(format!("column {:?} has non-finite values", spec.name)));
                    }
                }
                (ColumnData::Categorical(_), ColumnKind::Categorical) => {}
                _ => return Err(Error::Schema(format!("column {:?} has the wrong kind", spec.name))),
            }
        }
        if n == 0 {
            return Err(Error::ZeroRows);
        }
        Ok(Dataset {
            schema,
            columns,
            row_ids: (0..n).collect(),
            dropped_rows: 0,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData> {
        self.schema
            .index_of(name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Keeps the rows at the given positions (ascending), preserving row ids.
    pub(crate) fn select_positions(&self, positions: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(positions)).collect(),
            row_ids: positions.iter().map(|&i| self.row_ids[i]).collect(),
            dropped_rows: self.dropped_rows,
        }
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn is_missing(field: &str) -> bool {
    MISSING_TOKENS.contains(&field.trim())
}

fn parse_finite(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Which columns to keep, how to relabel the target, and which class counts
/// as positive for binary metrics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub target: String,
    pub features: Vec<String>,
    /// Target value → replacement value, applied before class indexing.
    #[serde(default)]
    pub class_merge: BTreeMap<String, String>,
    #[serde(default)]
    pub positive_class: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum FeatureGroup {
    Numeric { column: String },
    OneHot { column: String, levels: Vec<String> },
}

/// Encoding learned from one dataset and reused unchanged on any subset of
/// it, so feature dimensions stay fixed while records are deleted. A level
/// that no longer occurs simply produces an all-zero one-hot group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    groups: Vec<FeatureGroup>,
    target: String,
    class_merge: BTreeMap<String, String>,
    class_names: Vec<String>,
    positive_class: Option<usize>,
}

impl Preprocessor {
    pub fn fit(ds: &Dataset, cfg: &PreprocessConfig) -> Result<Self> {
        let schema = ds.schema();
        if schema.index_of(&cfg.target).is_none() {
            return Err(Error::Preprocess(format!("target column {:?} absent", cfg.target)));
        }
        let wanted: BTreeSet<&str> = cfg.features.iter().map(String::as_str).collect();
        for f in &wanted {
            if schema.index_of(f).is_none() {
                return Err(Error::UnknownColumn(f.to_string()));
            }
            if *f == cfg.target {
                return Err(Error::Preprocess(format!("target {f:?} listed as a feature")));
            }
        }

        let target_col = ds.column(&cfg.target)?;
        let observed: BTreeSet<String> = (0..ds.len()).map(|i| target_col.text(i)).collect();
        for from in cfg.class_merge.keys() {
            if !observed.contains(from) {
                return Err(Error::Preprocess(format!(
                    "class merge source {from:?} is not a value of {:?}",
                    cfg.target
                )));
            }
        }
        let class_names: Vec<String> = observed
            .iter()
            .map(|v| cfg.class_merge.get(v).unwrap_or(v).clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let positive_class = match &cfg.positive_class {
            None => None,
            Some(p) => Some(class_names.iter().position(|c| c == p).ok_or_else(|| {
                Error::Preprocess(format!("positive class {p:?} is not a target class"))
            })?),
        };

        let mut groups = Vec::new();
        for spec in schema.columns() {
            if !wanted.contains(spec.name.as_str()) {
                continue;
            }
            match ds.column(&spec.name)? {
                ColumnData::Numeric(_) => groups.push(FeatureGroup::Numeric {
                    column: spec.name.clone(),
                }),
                ColumnData::Categorical(values) => {
                    let levels: Vec<String> = values
                        .iter()
                        .cloned()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    if levels.len() == 1 {
                        warn!("categorical column {:?} has a single observed value", spec.name);
                    }
                    groups.push(FeatureGroup::OneHot {
                        column: spec.name.clone(),
                        levels,
                    });
                }
            }
        }
        Ok(Preprocessor {
            groups,
            target: cfg.target.clone(),
            class_merge: cfg.class_merge.clone(),
            class_names,
            positive_class,
        })
    }

    pub fn dim(&self) -> usize {
        self.groups
            .iter()
            .map(|g| match g {
                FeatureGroup::Numeric { .. } => 1,
                FeatureGroup::OneHot { levels, .. } => levels.len(),
            })
            .sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for g in &self.groups {
            match g {
                FeatureGroup::Numeric { column } => names.push(column.clone()),
                FeatureGroup::OneHot { column, levels } => {
                    names.extend(levels.iter().map(|l| format!("{column}={l}")))
                }
            }
        }
        names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Column ranges `[start, end)` of each one-hot group.
    pub fn one_hot_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut offset = 0;
        for g in &self.groups {
            match g {
                FeatureGroup::Numeric { .. } => offset += 1,
                FeatureGroup::OneHot { levels, .. } => {
                    out.push((offset, offset + levels.len()));
                    offset += levels.len();
                }
            }
        }
        out
    }

    pub fn transform(&self, ds: &Dataset) -> Result<PreparedDataset> {
        let n = ds.len();
        let d = self.dim();
        let mut features = Array2::<f64>::zeros((n, d));
        let mut offset = 0;
        for g in &self.groups {
            match g {
                FeatureGroup::Numeric { column } => {
                    match ds.column(column)? {
                        ColumnData::Numeric(v) => {
                            for (i, &x) in v.iter().enumerate() {
                                features[[i, offset]] = x;
                            }
                        }
                        ColumnData::Categorical(_) => {
                            return Err(Error::Preprocess(format!("column {column:?} changed kind")))
                        }
                    }
                    offset += 1;
                }
                FeatureGroup::OneHot { column, levels } => {
                    let col = ds.column(column)?;
                    for i in 0..n {
                        let value = col.text(i);
                        if let Ok(k) = levels.binary_search(&value) {
                            features[[i, offset + k]] = 1.0;
                        }
                    }
                    offset += levels.len();
                }
            }
        }

        let target = ds.column(&self.target)?;
        let labels = (0..n)
            .map(|i| {
                let raw = target.text(i);
                let merged = self.class_merge.get(&raw).unwrap_or(&raw);
                self.class_names
                    .binary_search(merged)
                    .map_err(|_| Error::Preprocess(format!("unseen target value {merged:?}")))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(PreparedDataset {
            features,
            labels,
            class_names: self.class_names.clone(),
            row_ids: ds.row_ids().to_vec(),
            feature_names: self.feature_names(),
            positive_class: self.positive_class,
        })
    }
}

/// Fits a [`Preprocessor`] on `ds` and encodes it.
pub fn preprocess(ds: &Dataset, cfg: &PreprocessConfig) -> Result<PreparedDataset> {
    Preprocessor::fit(ds, cfg)?.transform(ds)
}

/// Numeric design matrix plus class-indexed labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub row_ids: Vec<usize>,
    pub feature_names: Vec<String>,
    pub positive_class: Option<usize>,
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Positions of the given row ids; fails on an id that is not present.
    pub fn positions_of(&self, ids: &[usize]) -> Result<Vec<usize>> {
        let index: HashMap<usize, usize> =
            self.row_ids.iter().enumerate().map(|(pos, &id)| (id, pos)).collect();
        ids.iter()
            .map(|id| index.get(id).copied().ok_or(Error::UnknownRowId(*id)))
            .collect()
    }

    /// Feature rows and labels at the given positions.
    pub fn take(&self, positions: &[usize]) -> (Array2<f64>, Vec<usize>) {
        let x = self.features.select(ndarray::Axis(0), positions);
        let y = positions.iter().map(|&i| self.labels[i]).collect();
        (x, y)
    }

    /// Subset restricted to the given row ids (kept in ascending id order).
    pub fn subset(&self, ids: &BTreeSet<usize>) -> Result<PreparedDataset> {
        let ids: Vec<usize> = ids.iter().copied().collect();
        let positions = self.positions_of(&ids)?;
        let (features, labels) = self.take(&positions);
        Ok(PreparedDataset {
            features,
            labels,
            class_names: self.class_names.clone(),
            row_ids: ids,
            feature_names: self.feature_names.clone(),
            positive_class: self.positive_class,
        })
    }
}

/// Disjoint train/test partition of row ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub split_seed: u64,
}

/// Shuffles `ids` with the seeded stream and cuts the permutation after
/// `round(ratio * n)` entries (ties to even, clamped so both sides are
/// non-empty).
pub fn split_ids(ids: &[usize], ratio: f64, seed: u64) -> Result<SplitIndices> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Split(format!("ratio {ratio} outside (0, 1)")));
    }
    let n = ids.len();
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 rows, got {n}")));
    }
    let mut perm = ids.to_vec();
    perm.shuffle(&mut rng_from_seed(seed));
    let n_train = round_count(ratio * n as f64).clamp(1, n - 1);
    let test_ids = perm.split_off(n_train);
    Ok(SplitIndices {
        train_ids: perm,
        test_ids,
        split_seed: seed,
    })
}

pub fn train_test_split(pd: &PreparedDataset, ratio: f64, seed: u64) -> Result<SplitIndices> {
    split_ids(&pd.row_ids, ratio, seed)
}
