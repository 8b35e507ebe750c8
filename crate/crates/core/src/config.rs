//! Built-in dataset definitions, data-directory resolution and the TOML
//! harness config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnKind, ColumnSpec, Dataset, PreprocessConfig, Schema};
use crate::experiment::ExperimentConfig;
use crate::{Error, Result};

/// Overrides the folder that holds the built-in dataset files.
pub const DATA_DIR_ENV: &str = "ERASURE_BENCH_DATA_DIR";

pub const BUILTIN_DATASETS: [&str; 4] = ["adult", "cahousing", "cmc", "mgm"];

/// Where a dataset lives and how it is encoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    /// Relative paths are resolved against the data directory.
    pub file: PathBuf,
    pub columns: Vec<ColumnSpec>,
    pub target: String,
    pub features: Vec<String>,
    #[serde(default)]
    pub class_merge: BTreeMap<String, String>,
    /// Class scored by precision/recall/F1 on binary targets. Without it,
    /// multiclass targets use macro averaging.
    #[serde(default)]
    pub positive_class: Option<String>,
}

impl DatasetSpec {
    pub fn schema(&self) -> Result<Schema> {
        Schema::new(self.columns.clone(), &self.target, self.features.clone())
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            target: self.target.clone(),
            features: self.features.clone(),
            class_merge: self.class_merge.clone(),
            positive_class: self.positive_class.clone(),
        }
    }

    pub fn path_in(&self, data_dir: &Path) -> PathBuf {
        if self.file.is_absolute() {
            self.file.clone()
        } else {
            data_dir.join(&self.file)
        }
    }

    pub fn load(&self, data_dir: &Path) -> Result<Dataset> {
        Dataset::load_csv(self.path_in(data_dir), &self.schema()?)
    }

    /// Spec for an arbitrary CSV file: column kinds are inferred and every
    /// non-target column is a feature.
    pub fn from_csv(path: &Path, target: &str) -> Result<Self> {
        let schema = Schema::infer_from_csv(path, target)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_string());
        Ok(DatasetSpec {
            name,
            file: path.to_path_buf(),
            columns: schema.columns().to_vec(),
            target: target.to_string(),
            features: schema.feature_columns().to_vec(),
            class_merge: BTreeMap::new(),
            positive_class: None,
        })
    }
}

fn cols(spec: &[(&str, ColumnKind)]) -> Vec<ColumnSpec> {
    spec.iter()
        .map(|&(name, kind)| ColumnSpec {
            name: name.to_string(),
            kind,
        })
        .collect()
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// The four shipped dataset definitions, keyed by name.
pub fn builtin(name: &str) -> Option<DatasetSpec> {
    use ColumnKind::{Categorical as C, Numeric as N};
    let spec = match name {
        "adult" => {
            let features = [
                "sex",
                "age",
                "race",
                "marital-status",
                "education",
                "native-country",
                "workclass",
                "occupation",
            ];
            DatasetSpec {
                name: name.into(),
                file: "adult.csv".into(),
                columns: cols(&[
                    ("age", N),
                    ("workclass", C),
                    ("education", C),
                    ("marital-status", C),
                    ("occupation", C),
                    ("race", C),
                    ("sex", C),
                    ("native-country", C),
                    ("salary-class", C),
                ]),
                target: "salary-class".into(),
                features: strings(&features),
                class_merge: BTreeMap::new(),
                positive_class: Some(">50K".into()),
            }
        }
        "cahousing" => {
            let features = [
                "housing_median_age",
                "median_house_value",
                "median_income",
                "longitude",
                "latitude",
            ];
            let mut columns = cols(&features.map(|f| (f, N)));
            columns.push(ColumnSpec::categorical("ocean_proximity"));
            DatasetSpec {
                name: name.into(),
                file: "cahousing.csv".into(),
                columns,
                target: "ocean_proximity".into(),
                features: strings(&features),
                class_merge: [("NEAR BAY", "NEAR OCEAN"), ("ISLAND", "NEAR OCEAN")]
                    .into_iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
                positive_class: None,
            }
        }
        "cmc" => DatasetSpec {
            name: name.into(),
            file: "cmc.csv".into(),
            columns: cols(&[
                ("wife_age", N),
                ("wife_edu", N),
                ("num_children", N),
                ("contraceptive_method", C),
            ]),
            target: "contraceptive_method".into(),
            features: strings(&["wife_age", "wife_edu", "num_children"]),
            class_merge: BTreeMap::new(),
            positive_class: None,
        },
        "mgm" => DatasetSpec {
            name: name.into(),
            file: "mgm.csv".into(),
            columns: cols(&[
                ("bi_rads_assessment", N),
                ("age", N),
                ("shape", C),
                ("margin", C),
                ("density", C),
                ("severity", C),
            ]),
            target: "severity".into(),
            features: strings(&["bi_rads_assessment", "age", "shape", "margin", "density"]),
            class_merge: BTreeMap::new(),
            positive_class: Some("malignant".into()),
        },
        _ => return None,
    };
    Some(spec)
}

/// Data directory: `$ERASURE_BENCH_DATA_DIR`, else `./data` when present,
/// else the `data/` folder of the source checkout.
pub fn data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Looks `id` up among `custom` specs, then the built-ins; anything else is
/// treated as a CSV path and needs `target`.
pub fn resolve_dataset(id: &str, target: Option<&str>, custom: &[DatasetSpec]) -> Result<DatasetSpec> {
    if let Some(spec) = custom.iter().find(|s| s.name == id) {
        return Ok(spec.clone());
    }
    if let Some(spec) = builtin(id) {
        return Ok(spec);
    }
    let path = Path::new(id);
    if path.is_file() {
        let target = target.ok_or_else(|| {
            Error::Config(format!("dataset file {id:?} needs a target column (--target)"))
        })?;
        return DatasetSpec::from_csv(path, target);
    }
    Err(Error::UnknownDataset(id.to_string()))
}

/// Output options of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportOptions {
    pub out: PathBuf,
    /// Gaussian widths for the smoothed plot-data files.
    pub smooth_sigma: Vec<f64>,
    /// Also run the same sweep with random deletion and emit differences.
    pub compare_random: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            out: PathBuf::from("results"),
            smooth_sigma: vec![2.0],
            compare_random: false,
        }
    }
}

/// Contents of a harness config file.
///
/// ```toml
/// [experiment]
/// dataset = "adult"
/// classifiers = ["gbt", "random_forest"]
/// percentages = [0.0, 0.1, 0.2]
///
/// [experiment.scenario]
/// mode = "selection"
/// attribute = "salary-class"
/// values = [">50K"]
///
/// [report]
/// out = "results/adult-salary"
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub experiment: ExperimentConfig,
    pub report: ReportOptions,
    /// Extra dataset definitions, addressable by name.
    pub datasets: Vec<DatasetSpec>,
}

impl HarnessConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ClassifierKind;
    use crate::deletion::DeletionMode;

    #[test]
    fn builtins_have_valid_schemas() {
        for name in BUILTIN_DATASETS {
            let spec = builtin(name).unwrap();
            let schema = spec.schema().unwrap();
            assert_eq!(schema.target(), spec.target);
        }
        assert!(builtin("iris").is_none());
    }

    #[test]
    fn unknown_dataset_is_an_error() {
        assert!(matches!(
            resolve_dataset("no-such-dataset", None, &[]),
            Err(Error::UnknownDataset(_))
        ));
    }

    #[test]
    fn custom_specs_shadow_builtins() {
        let mut spec = builtin("cmc").unwrap();
        spec.file = "elsewhere.csv".into();
        let got = resolve_dataset("cmc", None, &[spec.clone()]).unwrap();
        assert_eq!(got.file, PathBuf::from("elsewhere.csv"));
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
[experiment]
dataset = "adult"
classifiers = ["gbt", "knn"]
percentages = [0.0, 0.5]
repetitions = 3

[experiment.scenario]
mode = "selection"
attribute = "salary-class"
values = [">50K"]

[report]
smooth_sigma = [2.0, 5.0]
"#;
        let cfg = HarnessConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.experiment.dataset, "adult");
        assert_eq!(cfg.experiment.classifiers, vec![ClassifierKind::Gbt, ClassifierKind::Knn]);
        assert_eq!(cfg.experiment.scenario.mode, DeletionMode::Selection);
        assert_eq!(cfg.experiment.repetitions, 3);
        assert_eq!(cfg.report.smooth_sigma, vec![2.0, 5.0]);
        let again = HarnessConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(HarnessConfig::from_toml_str("[experiment]\nbogus = 1\n").is_err());
    }
}
