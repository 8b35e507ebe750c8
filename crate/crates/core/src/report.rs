//! Result files: `results.csv`, `manifest.json` and plot-data CSVs.
//!
//! Floats are written with 9 significant digits so reruns can be compared
//! textually.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::ClassifierKind;
use crate::experiment::{diff_series, DiffRow, ExperimentConfig, Metric, SweepResult, SweepRow};
use crate::metrics::gaussian_smooth;
use crate::{Error, Result};

pub const RESULTS_HEADER: &str =
    "dataset,classifier,scenario,percentage,seed,accuracy,precision,recall,f1,n_remaining,warnings";

/// `x` with 9 significant digits in positional notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn results_line(r: &SweepRow) -> String {
    [
        csv_field(&r.dataset),
        r.classifier.to_string(),
        csv_field(&r.scenario),
        fmt_sig(r.percentage),
        r.seed.to_string(),
        fmt_sig(r.metrics.accuracy),
        fmt_sig(r.metrics.precision),
        fmt_sig(r.metrics.recall),
        fmt_sig(r.metrics.f1),
        r.n_remaining.to_string(),
        csv_field(&r.warnings.join(";")),
    ]
    .join(",")
}

/// The full `results.csv` text for the given sweeps, in order.
pub fn results_csv(sweeps: &[&SweepResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for sr in sweeps {
        for r in &sr.rows {
            out.push_str(&results_line(r));
            out.push('\n');
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub deletion: u64,
    pub split: u64,
    pub model: u64,
    pub repetitions: usize,
}

/// Run metadata written next to the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical JSON form of the experiment config.
    pub config_hash: String,
    pub harness_version: String,
    /// File name → SHA-256 of its bytes.
    pub dataset_checksums: BTreeMap<String, String>,
    pub seeds: RunSeeds,
    pub timestamp: String,
    pub dataset: String,
    pub scenario: String,
    pub averaging: String,
    pub class_names: Vec<String>,
    pub feature_dim: usize,
    pub n_records: usize,
    pub truncated: bool,
    pub config: ExperimentConfig,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    // Struct fields serialize in declaration order and maps are sorted, so
    // equal configs give equal bytes.
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, sweep: &SweepResult, dataset_files: &[PathBuf]) -> Result<Self> {
        let mut dataset_checksums = BTreeMap::new();
        for path in dataset_files {
            let name = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            dataset_checksums.insert(name, file_sha256(path)?);
        }
        Ok(RunManifest {
            config_hash: config_hash(cfg),
            harness_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_checksums,
            seeds: RunSeeds {
                deletion: cfg.scenario.seed,
                split: cfg.split_seed,
                model: cfg.hyperparams.model_seed,
                repetitions: cfg.repetitions,
            },
            timestamp: chrono::Utc::now().to_rfc3339(),
            dataset: sweep.dataset.clone(),
            scenario: sweep.scenario.clone(),
            averaging: sweep.averaging.clone(),
            class_names: sweep.class_names.clone(),
            feature_dim: sweep.feature_dim,
            n_records: sweep.n_records,
            truncated: sweep.truncated,
            config: cfg.clone(),
        })
    }
}

/// Seed-averaged metric minus its value at percentage 0, per classifier.
pub fn baseline_diff(sr: &SweepResult, metric: Metric) -> Vec<DiffRow> {
    let mut rows = Vec::new();
    for kind in sr.classifiers() {
        let series = sr.mean_series(kind, metric);
        let Some(&(_, base)) = series.iter().find(|(p, _)| *p == 0.0) else {
            continue;
        };
        rows.extend(series.into_iter().map(|(percentage, v)| DiffRow {
            classifier: kind,
            percentage,
            a: v,
            b: base,
            difference: v - base,
        }));
    }
    rows
}

/// (series name, classifier, (percentage, value) points).
type Series = (String, ClassifierKind, Vec<(f64, f64)>);

fn group_series(name: &str, rows: &[DiffRow], value: impl Fn(&DiffRow) -> f64) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(_, k, _)| *k == r.classifier) {
            Some((_, _, pts)) => pts.push((r.percentage, value(r))),
            None => out.push((name.to_string(), r.classifier, vec![(r.percentage, value(r))])),
        }
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn series_csv(scenario: &str, series: &[Series]) -> String {
    let mut out = String::from("scenario,series,classifier,percentage,value\n");
    for (name, kind, pts) in series {
        for &(p, v) in pts {
            out.push_str(&format!(
                "{},{name},{kind},{},{}\n",
                csv_field(scenario),
                fmt_sig(p),
                fmt_sig(v)
            ));
        }
    }
    out
}

/// Writes every result file into `out_dir` and returns their paths.
///
/// * `results.csv`: the rows of `sweep` then `comparison`.
/// * `manifest.json`.
/// * `plot_f1.csv`: seed-averaged F1 per classifier and percentage.
/// * `plot_diff.csv`: F1 minus the percentage-0 F1, and, with a comparison
///   sweep, F1 of `sweep` minus F1 of `comparison`.
/// * `plot_smoothed_sigma<σ>.csv`: every difference series after
///   [`gaussian_smooth`] with that σ.
pub fn emit_results(
    out_dir: &Path,
    sweep: &SweepResult,
    comparison: Option<&SweepResult>,
    manifest: &RunManifest,
    sigmas: &[f64],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, text: &str| -> Result<()> {
        let path = out_dir.join(name);
        write_text(&path, text)?;
        written.push(path);
        Ok(())
    };

    let mut sweeps = vec![sweep];
    sweeps.extend(comparison);
    emit("results.csv", &results_csv(&sweeps))?;

    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Config(e.to_string()))?;
    emit("manifest.json", &(json + "\n"))?;

    let mut f1 = String::from("scenario,classifier,percentage,f1_mean,f1_std,n_seeds\n");
    for sr in &sweeps {
        for kind in sr.classifiers() {
            let mut by_p: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
            for r in sr.rows.iter().filter(|r| r.classifier == kind) {
                by_p.entry(crate::rng::fraction_key(r.percentage))
                    .or_insert((r.percentage, Vec::new()))
                    .1
                    .push(r.metrics.f1);
            }
            for (p, vals) in by_p.into_values() {
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                f1.push_str(&format!(
                    "{},{kind},{},{},{},{}\n",
                    csv_field(&sr.scenario),
                    fmt_sig(p),
                    fmt_sig(mean),
                    fmt_sig(var.sqrt()),
                    vals.len()
                ));
            }
        }
    }
    emit("plot_f1.csv", &f1)?;

    let mut diffs = group_series("minus_baseline", &baseline_diff(sweep, Metric::F1), |r| r.difference);
    if let Some(other) = comparison {
        let rows = diff_series(sweep, other, Metric::F1)?;
        diffs.extend(group_series("minus_comparison", &rows, |r| r.difference));
    }
    emit("plot_diff.csv", &series_csv(&sweep.scenario, &diffs))?;

    for &sigma in sigmas {
        let smoothed = diffs
            .iter()
            .map(|(name, kind, pts)| {
                let values: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
                let s = gaussian_smooth(&values, sigma)?;
                Ok((
                    name.clone(),
                    *kind,
                    pts.iter().zip(s).map(|(&(p, _), v)| (p, v)).collect(),
                ))
            })
            .collect::<Result<Vec<Series>>>()?;
        emit(
            &format!("plot_smoothed_sigma{}.csv", fmt_sigma(sigma)),
            &series_csv(&sweep.scenario, &smoothed),
        )?;
    }
    Ok(written)
}

fn fmt_sigma(sigma: f64) -> String {
    if sigma.fract() == 0.0 {
        format!("{sigma:.0}")
    } else {
        sigma.to_string().replace('.', "_")
    }
}
