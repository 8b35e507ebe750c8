//! Deletion scenarios, per-record deletion weights and seeded weighted
//! sampling without replacement.
//!
//! # Sampling algorithm
//!
//! [`select_deletions`] is the normative sampler. For a weight vector
//! `w[0..n]` and a seed it
//!
//! 1. creates the harness stream (see [`crate::rng`]) from the seed,
//! 2. draws one uniform `u_i ∈ [0, 1)` per record, in position order,
//! 3. assigns the key `k_i = -ln(1 - u_i) / w_i` (an `Exp(w_i)` variate),
//! 4. deletes the `count` records with the smallest keys, ties going to the
//!    lower position.
//!
//! Because exponential clocks are memoryless, the record with the smallest
//! key is record `i` with probability `w_i / Σw`, the next smallest is drawn
//! the same way from the remaining records, and so on. This is exactly
//! sequential drawing proportional to the remaining weights.

use std::collections::BTreeSet;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnData, Dataset};
use crate::rng::{percentage_seed, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_AGE_CUTOFF: f64 = 45.0;

/// `round(x)` with ties to even, as a count.
pub fn round_count(x: f64) -> usize {
    x.round_ties_even().max(0.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionMode {
    Random,
    Selection,
    Thirds,
    Age,
    PositiveNumeric,
}

impl DeletionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeletionMode::Random => "random",
            DeletionMode::Selection => "selection",
            DeletionMode::Thirds => "thirds",
            DeletionMode::Age => "age",
            DeletionMode::PositiveNumeric => "positive_numeric",
        }
    }
}

impl std::str::FromStr for DeletionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random" => Ok(DeletionMode::Random),
            "selection" => Ok(DeletionMode::Selection),
            "thirds" => Ok(DeletionMode::Thirds),
            "age" => Ok(DeletionMode::Age),
            "positive_numeric" => Ok(DeletionMode::PositiveNumeric),
            other => Err(Error::Scenario(format!("unknown deletion mode {other:?}"))),
        }
    }
}

fn default_age_cutoff() -> f64 {
    DEFAULT_AGE_CUTOFF
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Declarative description of who is more likely to ask for erasure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeletionScenario {
    pub mode: DeletionMode,
    #[serde(default)]
    pub attribute: Option<String>,
    /// Values that double the deletion weight (selection mode).
    #[serde(default)]
    pub values: Vec<String>,
    /// Low values get the high weights (thirds, positive_numeric).
    #[serde(default)]
    pub reversed: bool,
    #[serde(default = "default_age_cutoff")]
    pub age_cutoff: f64,
    /// Ordinal order for a categorical attribute: the i-th level is read as
    /// the number `i + 1`. Empty means the values themselves must be numeric.
    #[serde(default)]
    pub levels: Vec<String>,
    /// Second scenario whose weights multiply this one's.
    #[serde(default)]
    pub combine_with: Option<Box<DeletionScenario>>,
    #[serde(default)]
    pub incremental: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Overrides the generated legend label.
    #[serde(default)]
    pub label: Option<String>,
}

impl DeletionScenario {
    fn base(mode: DeletionMode, attribute: Option<&str>) -> Self {
        DeletionScenario {
            mode,
            attribute: attribute.map(str::to_string),
            values: Vec::new(),
            reversed: false,
            age_cutoff: DEFAULT_AGE_CUTOFF,
            levels: Vec::new(),
            combine_with: None,
            incremental: false,
            seed: DEFAULT_SEED,
            label: None,
        }
    }

    pub fn random() -> Self {
        Self::base(DeletionMode::Random, None)
    }

    pub fn selection<S: AsRef<str>>(attribute: &str, values: &[S]) -> Self {
        let mut s = Self::base(DeletionMode::Selection, Some(attribute));
        s.values = values.iter().map(|v| v.as_ref().to_string()).collect();
        s
    }

    pub fn thirds(attribute: &str) -> Self {
        Self::base(DeletionMode::Thirds, Some(attribute))
    }

    pub fn age(attribute: &str) -> Self {
        Self::base(DeletionMode::Age, Some(attribute))
    }

    pub fn positive_numeric(attribute: &str) -> Self {
        Self::base(DeletionMode::PositiveNumeric, Some(attribute))
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = true;
        self
    }

    pub fn incremental(mut self) -> Self {
        self.incremental = true;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_age_cutoff(mut self, cutoff: f64) -> Self {
        self.age_cutoff = cutoff;
        self
    }

    pub fn with_levels<S: AsRef<str>>(mut self, levels: &[S]) -> Self {
        self.levels = levels.iter().map(|v| v.as_ref().to_string()).collect();
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn combined_with(mut self, other: DeletionScenario) -> Self {
        self.combine_with = Some(Box::new(other));
        self
    }

    /// Checks the scenario's own consistency (not against a dataset).
    pub fn validate(&self) -> Result<()> {
        let needs_attribute = self.mode != DeletionMode::Random;
        match (&self.attribute, needs_attribute) {
            (None, true) => {
                return Err(Error::Scenario(format!("{} mode needs an attribute", self.mode.as_str())))
            }
            (Some(a), false) => {
                return Err(Error::Scenario(format!("random mode takes no attribute (got {a:?})")))
            }
            _ => {}
        }
        if self.mode == DeletionMode::Selection && self.values.is_empty() {
            return Err(Error::Scenario("selection mode needs at least one value".into()));
        }
        if self.mode != DeletionMode::Selection && !self.values.is_empty() {
            return Err(Error::Scenario("values only apply to selection mode".into()));
        }
        if self.reversed && !matches!(self.mode, DeletionMode::Thirds | DeletionMode::PositiveNumeric) {
            return Err(Error::Scenario("reversed only applies to thirds and positive_numeric".into()));
        }
        if !(self.age_cutoff.is_finite() && self.age_cutoff > 0.0) {
            return Err(Error::Scenario(format!("age cutoff must be positive, got {}", self.age_cutoff)));
        }
        if let Some(other) = &self.combine_with {
            other.validate()?;
        }
        Ok(())
    }

    /// Legend label, e.g.
    /// `Marital Status [Married-civ-spouse] Incremental`.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut label = self.core_label();
        if let Some(other) = &self.combine_with {
            label = format!("{label} and {}", other.core_label());
        }
        if self.seed != DEFAULT_SEED {
            label.push_str(&format!(" (Seed = {})", self.seed));
        }
        if self.incremental {
            label.push_str(" Incremental");
        }
        label
    }

    fn core_label(&self) -> String {
        let title = self.attribute.as_deref().map(title_case).unwrap_or_default();
        match self.mode {
            DeletionMode::Random => "Random".to_string(),
            DeletionMode::Selection => format!("{title} [{}]", self.values.join(", ")),
            DeletionMode::Thirds if self.reversed => format!("{title} Thirds Reversed"),
            DeletionMode::Thirds => format!("{title} Thirds"),
            DeletionMode::PositiveNumeric if self.reversed => format!("{title} Reversed"),
            _ => title,
        }
    }
}

fn title_case(attr: &str) -> String {
    attr.split(|c: char| c == '-' || c == '_' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Positive deletion weight per record, aligned to the dataset's row ids.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    row_ids: Vec<usize>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, row_ids: Vec<usize>) -> Result<Self> {
        if weights.len() != row_ids.len() {
            return Err(Error::Scenario("weights and row ids differ in length".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Scenario(format!("weights must be finite and positive, got {w}")));
        }
        Ok(WeightVector { weights, row_ids })
    }

    /// Weights for rows `0..n`.
    pub fn uniform(n: usize) -> Self {
        WeightVector {
            weights: vec![1.0; n],
            row_ids: (0..n).collect(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The entries whose row id satisfies `keep`, order preserved.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> WeightVector {
        let (weights, row_ids) = self
            .weights
            .iter()
            .zip(&self.row_ids)
            .filter(|(_, &id)| keep(id))
            .map(|(&w, &id)| (w, id))
            .unzip();
        WeightVector { weights, row_ids }
    }
}

/// Reads the scenario attribute as numbers, via `levels` for an ordinal
/// categorical column.
fn numeric_attribute(ds: &Dataset, scenario: &DeletionScenario) -> Result<Vec<f64>> {
    let attr = scenario.attribute.as_deref().unwrap_or_default();
    match ds.column(attr)? {
        ColumnData::Numeric(v) => Ok(v.clone()),
        ColumnData::Categorical(v) if !scenario.levels.is_empty() => v
            .iter()
            .map(|x| {
                scenario
                    .levels
                    .iter()
                    .position(|l| l == x)
                    .map(|i| (i + 1) as f64)
                    .ok_or_else(|| Error::Scenario(format!("value {x:?} of {attr:?} missing from levels")))
            })
            .collect(),
        ColumnData::Categorical(v) => v
            .iter()
            .map(|x| {
                x.trim().parse::<f64>().ok().filter(|f| f.is_finite()).ok_or_else(|| {
                    Error::Scenario(format!(
                        "{} mode needs a numeric or ordinal attribute; {attr:?} has value {x:?}",
                        scenario.mode.as_str()
                    ))
                })
            })
            .collect(),
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn single_weights(ds: &Dataset, scenario: &DeletionScenario) -> Result<Vec<f64>> {
    let n = ds.len();
    match scenario.mode {
        DeletionMode::Random => Ok(vec![1.0; n]),
        DeletionMode::Selection => {
            let attr = scenario.attribute.as_deref().unwrap_or_default();
            let col = ds.column(attr)?;
            let flags: Vec<bool> = match col {
                // Case-insensitive so legend spellings ("married-civ-spouse") match the data.
                ColumnData::Categorical(v) => v
                    .iter()
                    .map(|x| scenario.values.iter().any(|s| s.eq_ignore_ascii_case(x)))
                    .collect(),
                ColumnData::Numeric(v) => {
                    let targets = scenario
                        .values
                        .iter()
                        .map(|s| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::Scenario(format!("value {s:?} is not numeric")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    v.iter().map(|x| targets.contains(x)).collect()
                }
            };
            if !flags.iter().any(|&f| f) {
                warn!("selection on {attr:?}: none of {:?} occur in the data", scenario.values);
            }
            Ok(flags.into_iter().map(|f| if f { 2.0 } else { 1.0 }).collect())
        }
        DeletionMode::Age => {
            let v = numeric_attribute(ds, scenario)?;
            Ok(v.iter()
                .map(|&x| if x < scenario.age_cutoff { 2.0 } else { 1.0 })
                .collect())
        }
        DeletionMode::Thirds => {
            let v = numeric_attribute(ds, scenario)?;
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let lo = quantile_sorted(&sorted, 1.0 / 3.0);
            let hi = quantile_sorted(&sorted, 2.0 / 3.0);
            if sorted.first() == sorted.last() {
                warn!(
                    "thirds on {:?}: attribute is constant, using uniform weights",
                    scenario.attribute
                );
                return Ok(vec![1.0; n]);
            }
            Ok(v.iter()
                .map(|&x| {
                    // Boundary values belong to the lower group.
                    let group = if x <= lo {
                        0
                    } else if x <= hi {
                        1
                    } else {
                        2
                    };
                    let group = if scenario.reversed { 2 - group } else { group };
                    (group + 1) as f64
                })
                .collect())
        }
        DeletionMode::PositiveNumeric => {
            let v = numeric_attribute(ds, scenario)?;
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let shift = if min < 1.0 {
                warn!(
                    "positive_numeric on {:?}: minimum {min} below 1, shifting so it maps to 1",
                    scenario.attribute
                );
                1.0 - min
            } else {
                0.0
            };
            let (min, max) = (min + shift, max + shift);
            Ok(v.iter()
                .map(|&x| {
                    let x = x + shift;
                    if scenario.reversed {
                        max + min - x
                    } else {
                        x
                    }
                })
                .collect())
        }
    }
}

/// Per-record deletion weights for `scenario` over `ds`.
///
/// Random: 1. Selection: 2 for a selected value, else 1. Thirds: 1/2/3 for
/// the low/middle/high third (split at the 1/3 and 2/3 quantiles). Age: 2
/// below the cutoff, else 1. Positive numeric: the value itself (shifted so
/// the minimum is at least 1); reversed maps `v` to `max + min - v`.
/// A combined scenario multiplies the two weight vectors.
pub fn compute_weights(ds: &Dataset, scenario: &DeletionScenario) -> Result<WeightVector> {
    scenario.validate()?;
    let mut weights = single_weights(ds, scenario)?;
    let mut next = scenario.combine_with.as_deref();
    while let Some(other) = next {
        let extra = single_weights(ds, other)?;
        for (w, e) in weights.iter_mut().zip(extra) {
            *w *= e;
        }
        next = other.combine_with.as_deref();
    }
    WeightVector::new(weights, ds.row_ids().to_vec())
}

/// Order sampling on explicit uniforms: positions of the `count` smallest
/// keys `-ln(1 - u_i) / w_i`, ties to the lower position, in ascending
/// position order.
pub fn order_sample(weights: &[f64], uniforms: &[f64], count: usize) -> Vec<usize> {
    debug_assert_eq!(weights.len(), uniforms.len());
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .zip(uniforms)
        .enumerate()
        .map(|(i, (&w, &u))| (-(1.0 - u).ln() / w, i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if count < keyed.len() && count > 0 {
        keyed.select_nth_unstable_by(count - 1, cmp);
    }
    keyed.truncate(count);
    let mut chosen: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    chosen.sort_unstable();
    chosen
}

/// Draws `count` row ids without replacement, with probability proportional
/// to the remaining weights. See the module docs for the exact algorithm.
pub fn select_deletions(w: &WeightVector, count: usize, seed: u64) -> Result<BTreeSet<usize>> {
    let n = w.len();
    if count > n {
        return Err(Error::CountExceedsPopulation { count, n });
    }
    let mut rng = rng_from_seed(seed);
    let uniforms: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    Ok(order_sample(&w.weights, &uniforms, count)
        .into_iter()
        .map(|i| w.row_ids[i])
        .collect())
}

/// Deleted row ids for each deletion fraction of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct DeletionPlan {
    pub percentages: Vec<f64>,
    pub deleted: Vec<BTreeSet<usize>>,
    pub n: usize,
    pub incremental: bool,
}

impl DeletionPlan {
    pub fn deleted_at(&self, p: f64) -> Option<&BTreeSet<usize>> {
        self.percentages
            .iter()
            .position(|&q| q == p)
            .map(|i| &self.deleted[i])
    }
}

pub fn validate_percentages(percentages: &[f64]) -> Result<()> {
    for &p in percentages {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Percentages(format!("{p} outside [0, 1)")));
        }
    }
    if percentages.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Percentages("percentages must be strictly increasing".into()));
    }
    Ok(())
}

/// Deletion sets for every fraction in `percentages`.
///
/// Each fraction `p` draws with seed `percentage_seed(scenario.seed, p)`, so
/// the set for a given `p` is the same in every run. In incremental mode the
/// set for `p_{i+1}` is the set for `p_i` plus a fresh draw of the shortfall
/// from the surviving records.
pub fn build_plan(ds: &Dataset, scenario: &DeletionScenario, percentages: &[f64]) -> Result<DeletionPlan> {
    validate_percentages(percentages)?;
    let weights = compute_weights(ds, scenario)?;
    build_plan_from_weights(&weights, scenario, percentages)
}

pub fn build_plan_from_weights(
    weights: &WeightVector,
    scenario: &DeletionScenario,
    percentages: &[f64],
) -> Result<DeletionPlan> {
    validate_percentages(percentages)?;
    let n = weights.len();
    let mut deleted = Vec::with_capacity(percentages.len());
    let mut previous: BTreeSet<usize> = BTreeSet::new();
    for &p in percentages {
        let count = round_count(p * n as f64);
        let seed = percentage_seed(scenario.seed, p);
        let set = if scenario.incremental {
            let survivors = weights.restricted(|id| !previous.contains(&id));
            let mut set = previous.clone();
            set.extend(select_deletions(&survivors, count - previous.len(), seed)?);
            previous = set.clone();
            set
        } else {
            select_deletions(weights, count, seed)?
        };
        deleted.push(set);
    }
    Ok(DeletionPlan {
        percentages: percentages.to_vec(),
        deleted,
        n,
        incremental: scenario.incremental,
    })
}

/// The records of `ds` whose ids are not in `deleted`, ids preserved.
pub fn apply_deletion(ds: &Dataset, deleted: &BTreeSet<usize>) -> Result<Dataset> {
    let ids = ds.row_ids();
    // Row ids are ascending, so membership is a binary search.
    if let Some(&bad) = deleted.iter().find(|id| ids.binary_search(id).is_err()) {
        return Err(Error::UnknownRowId(bad));
    }
    let keep: Vec<usize> = ids
        .iter()
        .enumerate()
        .filter(|(_, id)| !deleted.contains(id))
        .map(|(pos, _)| pos)
        .collect();
    Ok(ds.select_positions(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, Schema};

    fn people() -> Dataset {
        let schema = Schema::new(
            vec![
                ColumnSpec::numeric("age"),
                ColumnSpec::categorical("salary-class"),
                ColumnSpec::numeric("edu"),
                ColumnSpec::categorical("shape"),
            ],
            "salary-class",
            vec!["age".into(), "edu".into(), "shape".into()],
        )
        .unwrap();
        Dataset::from_columns(
            schema,
            vec![
                ColumnData::Numeric(vec![44.0, 45.0, 20.0, 70.0, 30.0, 60.0]),
                ColumnData::Categorical(
                    [">50K", "<=50K", "<=50K", ">50K", "<=50K", "<=50K"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                ),
                ColumnData::Numeric(vec![1.0, 5.0, 2.0, 3.0, 4.0, 1.0]),
                ColumnData::Categorical(
                    ["round", "oval", "irregular", "round", "oval", "lobular"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn random_weights_are_one() {
        let w = compute_weights(&people(), &DeletionScenario::random()).unwrap();
        assert!(w.weights().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn selection_doubles_selected_values() {
        let w = compute_weights(&people(), &DeletionScenario::selection("salary-class", &[">50K"])).unwrap();
        assert_eq!(w.weights(), &[2.0, 1.0, 1.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn age_cutoff_is_strict() {
        let w = compute_weights(&people(), &DeletionScenario::age("age")).unwrap();
        assert_eq!(w.weights(), &[2.0, 1.0, 2.0, 1.0, 2.0, 1.0]);
        let w = compute_weights(&people(), &DeletionScenario::age("age").with_age_cutoff(30.0)).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 2.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn positive_numeric_uses_value_directly() {
        let w = compute_weights(&people(), &DeletionScenario::positive_numeric("edu")).unwrap();
        assert_eq!(w.weights(), &[1.0, 5.0, 2.0, 3.0, 4.0, 1.0]);
        let w = compute_weights(&people(), &DeletionScenario::positive_numeric("edu").reversed()).unwrap();
        assert_eq!(w.weights(), &[5.0, 1.0, 4.0, 3.0, 2.0, 5.0]);
    }

    #[test]
    fn positive_numeric_shifts_non_positive_minimum() {
        let schema = Schema::new(
            vec![ColumnSpec::numeric("kids"), ColumnSpec::categorical("y")],
            "y",
            vec!["kids".into()],
        )
        .unwrap();
        let ds = Dataset::from_columns(
            schema,
            vec![
                ColumnData::Numeric(vec![0.0, 2.0, 5.0]),
                ColumnData::Categorical(vec!["a".into(); 3]),
            ],
        )
        .unwrap();
        let w = compute_weights(&ds, &DeletionScenario::positive_numeric("kids")).unwrap();
        assert_eq!(w.weights(), &[1.0, 3.0, 6.0]);
        let w = compute_weights(&ds, &DeletionScenario::positive_numeric("kids").reversed()).unwrap();
        assert_eq!(w.weights(), &[6.0, 4.0, 1.0]);
    }

    #[test]
    fn ordinal_levels_for_categorical_attribute() {
        let s = DeletionScenario::positive_numeric("shape").with_levels(&["round", "oval", "lobular", "irregular"]);
        let w = compute_weights(&people(), &s).unwrap();
        assert_eq!(w.weights(), &[1.0, 2.0, 4.0, 1.0, 2.0, 3.0]);
        let s = DeletionScenario::positive_numeric("shape");
        assert!(matches!(compute_weights(&people(), &s), Err(Error::Scenario(_))));
        let s = DeletionScenario::positive_numeric("shape").with_levels(&["round"]);
        assert!(compute_weights(&people(), &s).is_err());
    }

    #[test]
    fn numeric_strings_count_as_ordinals() {
        let s = DeletionScenario::thirds("salary-class");
        assert!(compute_weights(&people(), &s).is_err());
    }

    #[test]
    fn thirds_weights_with_boundary_to_lower_group() {
        // Sorted ages 20 30 44 45 60 70.
        let w = compute_weights(&people(), &DeletionScenario::thirds("age")).unwrap();
        // q1 = 30 + (2/3)(44-30) = 39.33, q2 = 45 + (1/3)(60-45) = 50
        assert_eq!(w.weights(), &[2.0, 2.0, 1.0, 3.0, 1.0, 3.0]);
        let w = compute_weights(&people(), &DeletionScenario::thirds("age").reversed()).unwrap();
        assert_eq!(w.weights(), &[2.0, 2.0, 3.0, 1.0, 3.0, 1.0]);

        let schema = Schema::new(
            vec![ColumnSpec::numeric("x"), ColumnSpec::categorical("y")],
            "y",
            vec!["x".into()],
        )
        .unwrap();
        let ds = Dataset::from_columns(
            schema,
            vec![
                ColumnData::Numeric(vec![1.0, 2.0, 3.0, 4.0]),
                ColumnData::Categorical(vec!["a".into(); 4]),
            ],
        )
        .unwrap();
        // q1 = 2, q2 = 3 exactly: the values 2 and 3 sit on the boundaries.
        let w = compute_weights(&ds, &DeletionScenario::thirds("x")).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn thirds_on_constant_attribute_is_uniform() {
        let schema = Schema::new(
            vec![ColumnSpec::numeric("x"), ColumnSpec::categorical("y")],
            "y",
            vec!["x".into()],
        )
        .unwrap();
        let ds = Dataset::from_columns(
            schema,
            vec![ColumnData::Numeric(vec![3.0; 5]), ColumnData::Categorical(vec!["a".into(); 5])],
        )
        .unwrap();
        let w = compute_weights(&ds, &DeletionScenario::thirds("x")).unwrap();
        assert_eq!(w.weights(), &[1.0; 5]);
    }

    #[test]
    fn combined_scenarios_multiply() {
        let s = DeletionScenario::age("age").combined_with(DeletionScenario::selection("salary-class", &[">50K"]));
        let w = compute_weights(&people(), &s).unwrap();
        assert_eq!(w.weights(), &[4.0, 1.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(s.label(), "Age and Salary Class [>50K]");
    }

    #[test]
    fn scenario_validation() {
        assert!(DeletionScenario::selection::<&str>("a", &[]).validate().is_err());
        assert!(DeletionScenario::age("a").with_age_cutoff(0.0).validate().is_err());
        assert!(DeletionScenario::age("a").reversed().validate().is_err());
        let mut r = DeletionScenario::random();
        r.attribute = Some("x".into());
        assert!(r.validate().is_err());
        let mut t = DeletionScenario::thirds("x");
        t.attribute = None;
        assert!(t.validate().is_err());
        let s = DeletionScenario::selection("nope", &["x"]);
        assert!(matches!(compute_weights(&people(), &s), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn labels_follow_legend_style() {
        assert_eq!(DeletionScenario::random().label(), "Random");
        assert_eq!(
            DeletionScenario::selection("marital-status", &["married-civ-spouse"]).label(),
            "Marital Status [married-civ-spouse]"
        );
        assert_eq!(
            DeletionScenario::selection("marital-status", &["married-civ-spouse"])
                .with_seed(782)
                .label(),
            "Marital Status [married-civ-spouse] (Seed = 782)"
        );
        assert_eq!(
            DeletionScenario::positive_numeric("bi_rads_assessment").incremental().label(),
            "Bi Rads Assessment Incremental"
        );
        assert_eq!(DeletionScenario::thirds("age").reversed().label(), "Age Thirds Reversed");
        assert_eq!(DeletionScenario::thirds("x").with_label("Custom").label(), "Custom");
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("positive-numeric".parse::<DeletionMode>().unwrap(), DeletionMode::PositiveNumeric);
        assert_eq!("Selection".parse::<DeletionMode>().unwrap(), DeletionMode::Selection);
        assert!("bogus".parse::<DeletionMode>().is_err());
    }

    #[test]
    fn select_boundaries() {
        let w = WeightVector::uniform(10);
        assert!(select_deletions(&w, 0, 1).unwrap().is_empty());
        assert_eq!(select_deletions(&w, 10, 1).unwrap(), (0..10).collect());
        assert!(matches!(
            select_deletions(&w, 11, 1),
            Err(Error::CountExceedsPopulation { count: 11, n: 10 })
        ));
    }

    #[test]
    fn select_is_deterministic() {
        let w = WeightVector::new((1..=50).map(f64::from).collect(), (100..150).collect()).unwrap();
        let a = select_deletions(&w, 7, 3).unwrap();
        assert_eq!(a, select_deletions(&w, 7, 3).unwrap());
        assert_eq!(a.len(), 7);
        assert!(a.iter().all(|id| (100..150).contains(id)));
    }

    #[test]
    fn uniform_inclusion_rate_is_count_over_n() {
        // Monte-Carlo oracle: every record's empirical inclusion frequency.
        let n = 10_000;
        let w = WeightVector::uniform(n);
        let mut hits = vec![0u32; n];
        let runs = 200;
        for seed in 0..runs {
            for id in select_deletions(&w, 1_000, seed).unwrap() {
                hits[id] += 1;
            }
        }
        let mean = hits.iter().map(|&h| f64::from(h)).sum::<f64>() / (n as f64 * runs as f64);
        assert!((mean - 0.10).abs() <= 0.01, "mean inclusion {mean}");
        // Per-record rates scatter binomially around 0.1 (sd ≈ 0.021 at 200 runs).
        let worst = hits
            .iter()
            .map(|&h| (f64::from(h) / runs as f64 - 0.1).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.12, "worst per-record deviation {worst}");
    }

    #[test]
    fn weight_vector_rejects_non_positive() {
        assert!(WeightVector::new(vec![1.0, 0.0], vec![0, 1]).is_err());
        assert!(WeightVector::new(vec![1.0, f64::NAN], vec![0, 1]).is_err());
        assert!(WeightVector::new(vec![1.0], vec![0, 1]).is_err());
    }

    #[test]
    fn plan_boundaries_and_nesting() {
        let ds = people();
        let s = DeletionScenario::random().incremental();
        let plan = build_plan(&ds, &s, &[0.0, 0.1, 0.2, 0.5, 0.9]).unwrap();
        assert!(plan.deleted[0].is_empty());
        for (p, set) in plan.percentages.iter().zip(&plan.deleted) {
            assert_eq!(set.len(), round_count(p * 6.0));
        }
        for w in plan.deleted.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn plan_rejects_bad_grids() {
        let ds = people();
        let s = DeletionScenario::random();
        assert!(build_plan(&ds, &s, &[0.2, 0.1]).is_err());
        assert!(build_plan(&ds, &s, &[0.1, 0.1]).is_err());
        assert!(build_plan(&ds, &s, &[1.0]).is_err());
        assert!(build_plan(&ds, &s, &[-0.1]).is_err());
    }

    #[test]
    fn non_incremental_sets_are_stable_per_percentage() {
        let w = WeightVector::uniform(1000);
        let s = DeletionScenario::random();
        let a = build_plan_from_weights(&w, &s, &[0.1, 0.3]).unwrap();
        let b = build_plan_from_weights(&w, &s, &[0.05, 0.3, 0.6]).unwrap();
        assert_eq!(a.deleted_at(0.3), b.deleted_at(0.3));
        assert_eq!(a, build_plan_from_weights(&w, &s, &[0.1, 0.3]).unwrap());
    }

    #[test]
    fn apply_deletion_cases() {
        let ds = people();
        assert_eq!(apply_deletion(&ds, &BTreeSet::new()).unwrap(), ds);
        let all_but_one: BTreeSet<usize> = [0, 1, 2, 4, 5].into_iter().collect();
        let one = apply_deletion(&ds, &all_but_one).unwrap();
        assert_eq!(one.row_ids(), &[3]);
        assert_eq!(one.column("age").unwrap(), &ColumnData::Numeric(vec![70.0]));
        let again = apply_deletion(&one, &BTreeSet::new()).unwrap();
        assert_eq!(again.row_ids(), &[3]);
        assert!(matches!(
            apply_deletion(&one, &[0].into_iter().collect()),
            Err(Error::UnknownRowId(0))
        ));
    }

    #[test]
    fn round_count_ties_to_even() {
        assert_eq!(round_count(2.5), 2);
        assert_eq!(round_count(3.5), 4);
        assert_eq!(round_count(3016.2), 3016);
    }
}
