//! The classifier suite behind one fit/predict contract: k-NN, linear SVM,
//! random forest, gradient-boosted trees and the zero-rule baseline.

pub mod binning;
pub mod forest;
pub mod gbt;
pub mod knn;
pub mod svm;
pub mod tree;

use std::fmt::Write as _;

use log::warn;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::rng::derive_seed;
use crate::{Error, Result};

use forest::{ForestParams, RandomForest};
use gbt::{BoostParams, GradientBoosting};
use knn::Knn;
use svm::LinearSvm;
use tree::Node;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    SvmLinear,
    RandomForest,
    Gbt,
    ZeroRule,
}

impl ClassifierKind {
    /// The four learners compared in the sweeps (zero-rule excluded).
    pub const SUITE: [ClassifierKind; 4] = [
        ClassifierKind::Knn,
        ClassifierKind::RandomForest,
        ClassifierKind::SvmLinear,
        ClassifierKind::Gbt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::SvmLinear => "svm_linear",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Gbt => "gbt",
            ClassifierKind::ZeroRule => "zero_rule",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "knn" | "k_nn" => Ok(ClassifierKind::Knn),
            "svm" | "svm_linear" | "linear_svm" => Ok(ClassifierKind::SvmLinear),
            "rf" | "random_forest" => Ok(ClassifierKind::RandomForest),
            "gbt" | "xgboost" | "boosting" => Ok(ClassifierKind::Gbt),
            "zero_rule" | "zerorule" | "zero" => Ok(ClassifierKind::ZeroRule),
            other => Err(Error::Hyperparams(format!("unknown classifier {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub rf_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub rf_max_depth: Option<usize>,
    /// Fraction of features tried per split; `None` means `√d`.
    pub rf_feature_subsample: Option<f64>,
    pub gbt_rounds: usize,
    pub gbt_depth: usize,
    pub gbt_learning_rate: f64,
    pub gbt_lambda: f64,
    pub gbt_min_child_weight: f64,
    pub model_seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            knn_k: 5,
            svm_c: 1.0,
            svm_epochs: 20,
            rf_trees: 100,
            rf_max_depth: None,
            rf_feature_subsample: None,
            gbt_rounds: 100,
            gbt_depth: 3,
            gbt_learning_rate: 0.1,
            gbt_lambda: 1.0,
            gbt_min_child_weight: 1.0,
            model_seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Hyperparams(msg));
        if self.knn_k < 1 {
            return bad("knn_k must be at least 1".into());
        }
        if !(self.svm_c.is_finite() && self.svm_c > 0.0) {
            return bad(format!("svm_c must be positive, got {}", self.svm_c));
        }
        if self.rf_trees < 1 {
            return bad("rf_trees must be at least 1".into());
        }
        if let Some(f) = self.rf_feature_subsample {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("rf_feature_subsample must be in (0, 1], got {f}"));
            }
        }
        if !(self.gbt_learning_rate > 0.0 && self.gbt_learning_rate <= 1.0) {
            return bad(format!("gbt_learning_rate must be in (0, 1], got {}", self.gbt_learning_rate));
        }
        if !(self.gbt_lambda >= 0.0 && self.gbt_min_child_weight >= 0.0) {
            return bad("gbt_lambda and gbt_min_child_weight must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Inner {
    Constant(usize),
    Knn(Knn),
    Svm(LinearSvm),
    Forest(RandomForest),
    Boosting(GradientBoosting),
}

/// A fitted classifier. Immutable; `predict` may be called concurrently.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: ClassifierKind,
    n_features: usize,
    n_classes: usize,
    inner: Inner,
}

/// Most frequent label, lowest index on ties.
pub fn majority_class(labels: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0u32; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    tree::argmax_count(&counts)
}

/// Trains `kind` on `x` (rows are samples) with labels in `0..n_classes`.
///
/// Training data with a single class yields a constant predictor for every
/// kind (with a warning).
pub fn fit(
    kind: ClassifierKind,
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    n_classes: usize,
    hp: &Hyperparams,
) -> Result<Model> {
    hp.validate()?;
    let (n, d) = x.dim();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            y_true: labels.len(),
            y_pred: n,
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::UnknownLabel { label: l, n_classes });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Hyperparams("training features must be finite".into()));
    }
    let majority = majority_class(labels, n_classes);
    let single_class = labels.iter().all(|&l| l == labels[0]);
    if single_class && kind != ClassifierKind::ZeroRule {
        warn!("{kind}: training data has a single class, fitting a constant predictor");
    }
    let seed = derive_seed(hp.model_seed, kind as u64);
    let inner = if single_class || kind == ClassifierKind::ZeroRule {
        Inner::Constant(majority)
    } else {
        match kind {
            ClassifierKind::Knn => Inner::Knn(Knn::fit(x, labels, n_classes, hp.knn_k)),
            ClassifierKind::SvmLinear => {
                Inner::Svm(LinearSvm::fit(x, labels, n_classes, hp.svm_c, hp.svm_epochs, seed))
            }
            ClassifierKind::RandomForest => Inner::Forest(RandomForest::fit(
                x,
                labels,
                n_classes,
                ForestParams {
                    n_trees: hp.rf_trees,
                    max_depth: hp.rf_max_depth,
                    feature_fraction: hp.rf_feature_subsample,
                    seed,
                },
            )),
            ClassifierKind::Gbt => Inner::Boosting(GradientBoosting::fit(
                x,
                labels,
                n_classes,
                BoostParams {
                    rounds: hp.gbt_rounds,
                    max_depth: hp.gbt_depth,
                    learning_rate: hp.gbt_learning_rate,
                    lambda: hp.gbt_lambda,
                    min_child_weight: hp.gbt_min_child_weight,
                },
            )),
            ClassifierKind::ZeroRule => unreachable!(),
        }
    };
    Ok(Model {
        kind,
        n_features: d,
        n_classes,
        inner,
    })
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.ncols(),
            });
        }
        Ok(match &self.inner {
            Inner::Constant(c) => vec![*c; x.nrows()],
            Inner::Knn(m) => m.predict(x),
            Inner::Svm(m) => m.predict(x),
            Inner::Forest(m) => m.predict(x),
            Inner::Boosting(m) => m.predict(x),
        })
    }

    /// Forest/boosting predictions from a prefix of the ensemble; other kinds
    /// ignore `size`.
    pub fn predict_truncated(&self, x: ArrayView2<'_, f64>, size: usize) -> Result<Vec<usize>> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.ncols(),
            });
        }
        match &self.inner {
            Inner::Forest(m) => Ok(m.predict_with(x, size)),
            Inner::Boosting(m) => Ok(m.predict_with(x, size)),
            _ => self.predict(x),
        }
    }

    /// Plain-text dump for debugging. The layout is informal and may change.
    ///
    /// ```text
    /// model <kind> features=<d> classes=<k>
    /// constant <class>                         (zero-rule / single class)
    /// knn k=<k> train_rows=<n>
    /// svm class=<c> w=<w_1 ... w_d> b=<bias>   (one line per class)
    /// tree <t> / round <r> class <c>           (header per tree)
    ///   <node>: split f<feature> <= <threshold> -> <left> <right>
    ///   <node>: leaf <value>
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "model {} features={} classes={}",
            self.kind, self.n_features, self.n_classes
        );
        match &self.inner {
            Inner::Constant(c) => {
                let _ = writeln!(out, "constant {c}");
            }
            Inner::Knn(m) => {
                let _ = writeln!(out, "knn k={} train_rows={}", m.k(), m.n_train());
            }
            Inner::Svm(m) => {
                for (c, w) in m.weights.outer_iter().enumerate() {
                    let d = w.len() - 1;
                    let ws: Vec<String> = w.iter().take(d).map(|v| format!("{v:e}")).collect();
                    let _ = writeln!(out, "svm class={c} w={} b={:e}", ws.join(" "), w[d]);
                }
            }
            Inner::Forest(m) => {
                for (t, tree) in m.trees.iter().enumerate() {
                    let _ = writeln!(out, "tree {t}");
                    dump_tree(&mut out, &tree.nodes);
                }
            }
            Inner::Boosting(m) => {
                for (r, trees) in m.rounds.iter().enumerate() {
                    for (c, tree) in trees.iter().enumerate() {
                        let _ = writeln!(out, "round {r} class {c}");
                        dump_tree(&mut out, &tree.nodes);
                    }
                }
            }
        }
        out
    }
}

fn dump_tree<T: std::fmt::Display>(out: &mut String, nodes: &[Node<T>]) {
    for (i, n) in nodes.iter().enumerate() {
        let _ = match n {
            Node::Leaf(v) => writeln!(out, "  {i}: leaf {v}"),
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => writeln!(out, "  {i}: split f{feature} <= {threshold} -> {left} {right}"),
        };
    }
}
