//! Sweep orchestration: baseline, deletion, retraining and measurement over
//! a grid of deletion fractions, plus difference series between sweeps.
//!
//! Repetition `r` shifts every seed by `r`: the deletion seed, the split seed
//! and the model seed. Rows are returned sorted by classifier (config order,
//! zero-rule last), percentage and repetition, whatever order the parallel
//! cells finish in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, Hyperparams};
use crate::config::DatasetSpec;
use crate::dataset::{split_ids, Dataset, PreparedDataset, PreprocessConfig, Preprocessor};
use crate::deletion::{build_plan_from_weights, compute_weights, validate_percentages, DeletionScenario};
use crate::metrics::{evaluate, Averaging, MetricsReport};
use crate::rng::fraction_key;
use crate::{Error, Result};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.7;
pub const DEFAULT_SPLIT_SEED: u64 = 42;
/// A sweep stops once fewer records than this remain.
pub const MIN_ROWS: usize = 10;

pub const WARN_MISSING_CLASS: &str = "missing_class_in_train";
pub const WARN_SINGLE_CLASS: &str = "single_class_train";

/// 0.00, 0.05, ..., 0.95.
pub fn default_percentages() -> Vec<f64> {
    (0..20).map(|i| (i * 5) as f64 / 100.0).collect()
}

/// Expands `start:stop:step` (in percent, stop inclusive) to fractions.
pub fn parse_percent_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Percentages(format!("expected start:stop:step in percent, got {spec:?}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && start <= stop) {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (start + i as f64 * step) / 100.0).collect();
    validate_percentages(&grid)?;
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in dataset name, custom spec name or CSV path.
    pub dataset: String,
    /// Target column for CSV-path datasets.
    pub target: Option<String>,
    pub scenario: DeletionScenario,
    pub classifiers: Vec<ClassifierKind>,
    pub hyperparams: Hyperparams,
    pub percentages: Vec<f64>,
    pub split_seed: u64,
    pub split_ratio: f64,
    pub repetitions: usize,
    /// Split once and delete only from the training part.
    pub fixed_test: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: "adult".into(),
            target: None,
            scenario: DeletionScenario::random(),
            classifiers: ClassifierKind::SUITE.to_vec(),
            hyperparams: Hyperparams::default(),
            percentages: default_percentages(),
            split_seed: DEFAULT_SPLIT_SEED,
            split_ratio: DEFAULT_SPLIT_RATIO,
            repetitions: 1,
            fixed_test: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        validate_percentages(&self.percentages)?;
        self.scenario.validate()?;
        self.hyperparams.validate()?;
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers selected".into()));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Split(format!("ratio {} outside (0, 1)", self.split_ratio)));
        }
        Ok(())
    }

    /// Requested grid with 0 added if absent.
    pub fn grid(&self) -> Vec<f64> {
        let mut grid = self.percentages.clone();
        if grid.first() != Some(&0.0) {
            grid.insert(0, 0.0);
        }
        grid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl Metric {
    pub fn of(self, m: &MetricsReport) -> f64 {
        match self {
            Metric::Accuracy => m.accuracy,
            Metric::Precision => m.precision,
            Metric::Recall => m.recall,
            Metric::F1 => m.f1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" | "acc" => Ok(Metric::Accuracy),
            "precision" | "prec" => Ok(Metric::Precision),
            "recall" | "rec" => Ok(Metric::Recall),
            "f1" => Ok(Metric::F1),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub scenario: String,
    pub percentage: f64,
    /// Deletion seed of the repetition.
    pub seed: u64,
    pub metrics: MetricsReport,
    pub n_remaining: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dataset: String,
    pub scenario: String,
    pub averaging: String,
    pub class_names: Vec<String>,
    pub feature_dim: usize,
    pub n_records: usize,
    pub rows: Vec<SweepRow>,
    /// Some repetition stopped early because too few records remained.
    pub truncated: bool,
}

impl SweepResult {
    pub fn percentages(&self) -> Vec<f64> {
        let keys: BTreeMap<u64, f64> = self
            .rows
            .iter()
            .map(|r| (fraction_key(r.percentage), r.percentage))
            .collect();
        keys.into_values().collect()
    }

    pub fn classifiers(&self) -> Vec<ClassifierKind> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.classifier) {
                seen.push(r.classifier);
            }
        }
        seen
    }

    /// Seed-averaged `metric` per percentage for one classifier.
    pub fn mean_series(&self, classifier: ClassifierKind, metric: Metric) -> Vec<(f64, f64)> {
        let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.classifier == classifier) {
            let e = acc.entry(fraction_key(r.percentage)).or_insert((r.percentage, 0.0, 0));
            e.1 += metric.of(&r.metrics);
            e.2 += 1;
        }
        acc.into_values().map(|(p, sum, n)| (p, sum / n as f64)).collect()
    }
}

/// One (percentage, repetition) training/test pair.
struct Cell {
    rep: usize,
    percentage: f64,
    seed: u64,
    train: Vec<usize>,
    test: Vec<usize>,
    n_remaining: usize,
}

/// A dataset loaded and encoded once, ready for any number of sweeps.
pub struct Experiment {
    cfg: ExperimentConfig,
    name: String,
    data: Dataset,
    prepared: PreparedDataset,
    positions: HashMap<usize, usize>,
    averaging: Averaging,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig, spec: &DatasetSpec, data_dir: &Path) -> Result<Self> {
        let data = spec.load(data_dir)?;
        Self::from_dataset(cfg, &spec.name, data, &spec.preprocess_config())
    }

    pub fn from_dataset(cfg: ExperimentConfig, name: &str, data: Dataset, pcfg: &PreprocessConfig) -> Result<Self> {
        cfg.validate()?;
        let prep = Preprocessor::fit(&data, pcfg)?;
        let prepared = prep.transform(&data)?;
        let averaging = match prepared.positive_class {
            Some(c) => Averaging::BinaryPositive(c),
            None if prepared.n_classes() == 2 => Averaging::BinaryPositive(1),
            None => Averaging::Macro,
        };
        let positions = prepared.row_ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        info!(
            "{name}: {} records, {} features, classes {:?}, averaging {}",
            prepared.len(),
            prepared.dim(),
            prepared.class_names,
            averaging.describe(&prepared.class_names)
        );
        Ok(Experiment {
            cfg,
            name: name.to_string(),
            data,
            prepared,
            positions,
            averaging,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn prepared(&self) -> &PreparedDataset {
        &self.prepared
    }

    pub fn averaging(&self) -> Averaging {
        self.averaging
    }

    /// Undeleted-data rows (percentage 0) for every classifier and the
    /// zero-rule baseline.
    pub fn run_baseline(&self) -> Result<Vec<SweepRow>> {
        let (cells, _) = self.cells(&self.cfg.scenario, &[0.0])?;
        self.evaluate_cells(&self.cfg.scenario, cells)
    }

    pub fn run_sweep(&self) -> Result<SweepResult> {
        self.run_sweep_with(&self.cfg.scenario)
    }

    /// The configured sweep under a different scenario.
    pub fn run_sweep_with(&self, scenario: &DeletionScenario) -> Result<SweepResult> {
        scenario.validate()?;
        let (cells, truncated) = self.cells(scenario, &self.cfg.grid())?;
        let rows = self.evaluate_cells(scenario, cells)?;
        Ok(SweepResult {
            dataset: self.name.clone(),
            scenario: scenario.label(),
            averaging: self.averaging.describe(&self.prepared.class_names),
            class_names: self.prepared.class_names.clone(),
            feature_dim: self.prepared.dim(),
            n_records: self.prepared.len(),
            rows,
            truncated,
        })
    }

    fn to_positions(&self, ids: &[usize]) -> Vec<usize> {
        ids.iter().map(|id| self.positions[id]).collect()
    }

    fn cells(&self, scenario: &DeletionScenario, grid: &[f64]) -> Result<(Vec<Cell>, bool)> {
        let all_ids = &self.prepared.row_ids;
        let mut cells = Vec::new();
        let mut truncated = false;
        for rep in 0..self.cfg.repetitions {
            let scenario = scenario.clone().with_seed(scenario.seed.wrapping_add(rep as u64));
            let split_seed = self.cfg.split_seed.wrapping_add(rep as u64);
            let weights = compute_weights(&self.data, &scenario)?;
            if self.cfg.fixed_test {
                let split = split_ids(all_ids, self.cfg.split_ratio, split_seed)?;
                let train_set: BTreeSet<usize> = split.train_ids.iter().copied().collect();
                let pool = weights.restricted(|id| train_set.contains(&id));
                let plan = build_plan_from_weights(&pool, &scenario, grid)?;
                for (&p, deleted) in grid.iter().zip(&plan.deleted) {
                    let train: Vec<usize> = split
                        .train_ids
                        .iter()
                        .copied()
                        .filter(|id| !deleted.contains(id))
                        .collect();
                    if train.len() < MIN_ROWS {
                        warn!("{}: fewer than {MIN_ROWS} training records at p={p}, stopping", scenario.label());
                        truncated = true;
                        break;
                    }
                    cells.push(Cell {
                        rep,
                        percentage: p,
                        seed: scenario.seed,
                        n_remaining: train.len() + split.test_ids.len(),
                        train: self.to_positions(&train),
                        test: self.to_positions(&split.test_ids),
                    });
                }
            } else {
                let plan = build_plan_from_weights(&weights, &scenario, grid)?;
                for (&p, deleted) in grid.iter().zip(&plan.deleted) {
                    let remaining: Vec<usize> =
                        all_ids.iter().copied().filter(|id| !deleted.contains(id)).collect();
                    if remaining.len() < MIN_ROWS {
                        warn!("{}: fewer than {MIN_ROWS} records at p={p}, stopping", scenario.label());
                        truncated = true;
                        break;
                    }
                    let split = split_ids(&remaining, self.cfg.split_ratio, split_seed)?;
                    cells.push(Cell {
                        rep,
                        percentage: p,
                        seed: scenario.seed,
                        n_remaining: remaining.len(),
                        train: self.to_positions(&split.train_ids),
                        test: self.to_positions(&split.test_ids),
                    });
                }
            }
        }
        Ok((cells, truncated))
    }

    fn evaluate_cells(&self, scenario: &DeletionScenario, cells: Vec<Cell>) -> Result<Vec<SweepRow>> {
        let label = scenario.label();
        let n_classes = self.prepared.n_classes();
        let kinds = &self.cfg.classifiers;
        let zero_rule_listed = kinds.contains(&ClassifierKind::ZeroRule);
        let order = |k: ClassifierKind| kinds.iter().position(|&c| c == k).unwrap_or(kinds.len());

        let per_cell: Vec<Vec<(usize, usize, u64, SweepRow)>> = cells
            .into_par_iter()
            .map(|cell| -> Result<_> {
                let (x_train, y_train) = self.prepared.take(&cell.train);
                let (x_test, y_test) = self.prepared.take(&cell.test);
                let mut warnings = Vec::new();
                let present: BTreeSet<usize> = y_train.iter().copied().collect();
                if present.len() < n_classes {
                    warnings.push(WARN_MISSING_CLASS.to_string());
                }
                if present.len() == 1 {
                    warnings.push(WARN_SINGLE_CLASS.to_string());
                }
                if !warnings.is_empty() {
                    warn!("{label} p={} seed={}: {}", cell.percentage, cell.seed, warnings.join(";"));
                }
                let mut run: Vec<ClassifierKind> = kinds.clone();
                if cell.percentage == 0.0 && !zero_rule_listed {
                    run.push(ClassifierKind::ZeroRule);
                }
                let hp = Hyperparams {
                    model_seed: self.cfg.hyperparams.model_seed.wrapping_add(cell.rep as u64),
                    ..self.cfg.hyperparams.clone()
                };
                run.into_iter()
                    .map(|kind| {
                        let model = classifiers::fit(kind, x_train.view(), &y_train, n_classes, &hp)?;
                        let pred = model.predict(x_test.view())?;
                        let metrics = evaluate(&y_test, &pred, n_classes, self.averaging)?;
                        Ok((
                            order(kind),
                            cell.rep,
                            fraction_key(cell.percentage),
                            SweepRow {
                                dataset: self.name.clone(),
                                classifier: kind,
                                scenario: label.clone(),
                                percentage: cell.percentage,
                                seed: cell.seed,
                                metrics,
                                n_remaining: cell.n_remaining,
                                warnings: warnings.clone(),
                            },
                        ))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        let mut keyed: Vec<_> = per_cell.into_iter().flatten().collect();
        keyed.sort_by_key(|(order, rep, p, _)| (*order, *p, *rep));
        Ok(keyed.into_iter().map(|(_, _, _, row)| row).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub classifier: ClassifierKind,
    pub percentage: f64,
    pub a: f64,
    pub b: f64,
    /// `a - b`, each side averaged over its seeds.
    pub difference: f64,
}

/// Per (classifier, percentage): seed-averaged `metric` of `a` minus that of
/// `b`. Both sweeps must cover the same dataset, classifiers and percentages.
pub fn diff_series(a: &SweepResult, b: &SweepResult, metric: Metric) -> Result<Vec<DiffRow>> {
    if a.dataset != b.dataset {
        return Err(Error::GridMismatch(format!("datasets {:?} and {:?}", a.dataset, b.dataset)));
    }
    let means = |sr: &SweepResult| -> BTreeMap<(ClassifierKind, u64), (f64, f64)> {
        let mut acc: BTreeMap<(ClassifierKind, u64), (f64, f64, usize)> = BTreeMap::new();
        for r in &sr.rows {
            let e = acc
                .entry((r.classifier, fraction_key(r.percentage)))
                .or_insert((r.percentage, 0.0, 0));
            e.1 += metric.of(&r.metrics);
            e.2 += 1;
        }
        acc.into_iter().map(|(k, (p, s, n))| (k, (p, s / n as f64))).collect()
    };
    let (ma, mb) = (means(a), means(b));
    if ma.keys().ne(mb.keys()) {
        return Err(Error::GridMismatch("classifier/percentage grids differ".into()));
    }
    let order = a.classifiers();
    let mut rows: Vec<DiffRow> = ma
        .into_iter()
        .zip(mb.into_values())
        .map(|(((classifier, _), (percentage, va)), (_, vb))| DiffRow {
            classifier,
            percentage,
            a: va,
            b: vb,
            difference: va - vb,
        })
        .collect();
    rows.sort_by(|x, y| {
        let pos = |k| order.iter().position(|&c| c == k);
        pos(x.classifier)
            .cmp(&pos(y.classifier))
            .then(x.percentage.total_cmp(&y.percentage))
    });
    Ok(rows)
}
