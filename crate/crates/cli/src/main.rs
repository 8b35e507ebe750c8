//! `erasure-bench`: run a deletion sweep and write its result files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use log::info;

use erasure_bench::classifiers::ClassifierKind;
use erasure_bench::config::{data_dir, resolve_dataset, DatasetSpec, HarnessConfig};
use erasure_bench::deletion::{DeletionMode, DeletionScenario};
use erasure_bench::experiment::{parse_percent_range, Experiment};
use erasure_bench::report::{emit_results, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "erasure-bench",
    version,
    about = "Simulate biased record deletion and measure classifier degradation",
    arg_required_else_help = true
)]
struct Cli {
    /// TOML harness config; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// adult, cahousing, cmc, mgm, or a CSV path.
    #[arg(long)]
    dataset: Option<String>,

    /// Target column of a CSV-path dataset.
    #[arg(long)]
    target: Option<String>,

    /// Classifier to train (repeatable): knn, svm_linear, random_forest, gbt, zero_rule.
    #[arg(long = "classifier", value_name = "KIND")]
    classifiers: Vec<ClassifierKind>,

    /// Deletion mode: random, selection, thirds, age, positive_numeric.
    #[arg(long)]
    mode: Option<DeletionMode>,

    #[arg(long)]
    attribute: Option<String>,

    /// Selected values (selection mode), comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,

    /// Ordinal order of a categorical attribute, comma separated.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<String>,

    /// Give low values the high weights (thirds, positive_numeric).
    #[arg(long)]
    reversed: bool,

    #[arg(long, value_name = "AGE")]
    age_cutoff: Option<f64>,

    /// Second bias multiplied into the first: its mode.
    #[arg(long, value_name = "MODE")]
    combine_mode: Option<DeletionMode>,

    #[arg(long, value_name = "ATTRIBUTE", requires = "combine_mode")]
    combine_attribute: Option<String>,

    #[arg(long, value_name = "VALUES", value_delimiter = ',', requires = "combine_mode")]
    combine_values: Vec<String>,

    /// Nest the deleted sets across percentages.
    #[arg(long)]
    incremental: bool,

    /// Deletion seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    split_seed: Option<u64>,

    #[arg(long)]
    split_ratio: Option<f64>,

    /// Percentage grid as start:stop:step, stop inclusive.
    #[arg(long, value_name = "START:STOP:STEP")]
    percent: Option<String>,

    #[arg(long)]
    repetitions: Option<usize>,

    /// Keep one test split and delete only from the training part.
    #[arg(long)]
    fixed_test: bool,

    /// Gaussian width for smoothed plot data (repeatable).
    #[arg(long, value_name = "SIGMA")]
    smooth_sigma: Vec<f64>,

    /// Also run random deletion with the same seeds and write differences.
    #[arg(long)]
    compare_random: bool,

    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Legend label for the scenario.
    #[arg(long)]
    label: Option<String>,

    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    svm_epochs: Option<usize>,
    #[arg(long)]
    rf_trees: Option<usize>,
    #[arg(long)]
    rf_max_depth: Option<usize>,
    #[arg(long)]
    gbt_rounds: Option<usize>,
    #[arg(long)]
    gbt_depth: Option<usize>,
    #[arg(long)]
    gbt_learning_rate: Option<f64>,
    #[arg(long)]
    model_seed: Option<u64>,
}

/// Reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl std::fmt::Display) -> anyhow::Error {
    UsageError(msg.to_string()).into()
}

fn scenario_from(cli: &Cli, mut scenario: DeletionScenario) -> DeletionScenario {
    if let Some(mode) = cli.mode {
        scenario = DeletionScenario {
            mode,
            seed: scenario.seed,
            age_cutoff: scenario.age_cutoff,
            ..DeletionScenario::random()
        };
    }
    if let Some(a) = &cli.attribute {
        scenario.attribute = Some(a.clone());
    }
    if !cli.values.is_empty() {
        scenario.values = cli.values.clone();
    }
    if !cli.levels.is_empty() {
        scenario.levels = cli.levels.clone();
    }
    scenario.reversed |= cli.reversed;
    scenario.incremental |= cli.incremental;
    if let Some(c) = cli.age_cutoff {
        scenario.age_cutoff = c;
    }
    if let Some(s) = cli.seed {
        scenario.seed = s;
    }
    if let Some(l) = &cli.label {
        scenario.label = Some(l.clone());
    }
    if let Some(mode) = cli.combine_mode {
        scenario.combine_with = Some(Box::new(DeletionScenario {
            mode,
            attribute: cli.combine_attribute.clone(),
            values: cli.combine_values.clone(),
            ..DeletionScenario::random()
        }));
    }
    scenario
}

fn build_config(cli: &Cli) -> anyhow::Result<(HarnessConfig, DatasetSpec)> {
    let mut hc = match &cli.config {
        Some(path) => HarnessConfig::load(path).map_err(usage)?,
        None => HarnessConfig::default(),
    };
    let cfg = &mut hc.experiment;
    if let Some(d) = &cli.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(t) = &cli.target {
        cfg.target = Some(t.clone());
    }
    if !cli.classifiers.is_empty() {
        cfg.classifiers = cli.classifiers.clone();
    }
    cfg.scenario = scenario_from(cli, cfg.scenario.clone());
    if let Some(s) = cli.split_seed {
        cfg.split_seed = s;
    }
    if let Some(r) = cli.split_ratio {
        cfg.split_ratio = r;
    }
    if let Some(spec) = &cli.percent {
        cfg.percentages = parse_percent_range(spec).map_err(usage)?;
    }
    if let Some(r) = cli.repetitions {
        cfg.repetitions = r;
    }
    cfg.fixed_test |= cli.fixed_test;
    let hp = &mut cfg.hyperparams;
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = cli.$field { hp.$field = v; })*
        };
    }
    set!(knn_k, svm_c, svm_epochs, rf_trees, gbt_rounds, gbt_depth, gbt_learning_rate, model_seed);
    if cli.rf_max_depth.is_some() {
        hp.rf_max_depth = cli.rf_max_depth;
    }
    if !cli.smooth_sigma.is_empty() {
        hc.report.smooth_sigma = cli.smooth_sigma.clone();
    }
    if let Some(out) = &cli.out {
        hc.report.out = out.clone();
    }
    hc.report.compare_random |= cli.compare_random;

    for &s in &hc.report.smooth_sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(usage(format!("--smooth-sigma must be positive, got {s}")));
        }
    }
    hc.experiment.validate().map_err(usage)?;
    let spec = resolve_dataset(
        &hc.experiment.dataset,
        hc.experiment.target.as_deref(),
        &hc.datasets,
    )
    .map_err(usage)?;
    Ok((hc, spec))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (hc, spec) = build_config(&cli)?;
    let dir = data_dir();
    let cfg = hc.experiment.clone();
    let exp = Experiment::new(cfg.clone(), &spec, &dir)
        .with_context(|| format!("preparing dataset {:?}", spec.name))?;
    let sweep = exp.run_sweep()?;
    let comparison = if hc.report.compare_random && cfg.scenario.mode != DeletionMode::Random {
        let random = DeletionScenario {
            incremental: cfg.scenario.incremental,
            seed: cfg.scenario.seed,
            ..DeletionScenario::random()
        };
        Some(exp.run_sweep_with(&random)?)
    } else {
        None
    };
    let manifest = RunManifest::new(&cfg, &sweep, &[spec.path_in(&dir)])?;
    let files = emit_results(&hc.report.out, &sweep, comparison.as_ref(), &manifest, &hc.report.smooth_sigma)?;
    info!("{} rows, {} files", sweep.rows.len(), files.len());
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
