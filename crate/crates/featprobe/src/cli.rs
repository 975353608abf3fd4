//! Command-line interface: `test`, `ablate`, `baselines`, and
//! `calibrate` subcommands over CSV inputs.
//!
//! All machine output is JSON with fixed field order and shortest
//! round-trip float printing, so identical argv on identical inputs
//! yields byte-identical files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::baselines::{self, BaselineScore, BinningSpec};
use crate::dataset::{self, ColType, Dataset, Schema};
use crate::error::{Error, Result};
use crate::gbrt::{BoostLoss, BoostParams};
use crate::gradients::LossId;
use crate::harness;
use crate::utility::{relevance_test, TestConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "featprobe",
    about = "Statistical prediction of new feature utility without re-training",
    version
)]
struct Cli {
    /// Worker thread count (overridden by FEATPROBE_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print progress to stderr.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// CSV input (UTF-8, header row, comma separator).
    #[arg(long)]
    data: PathBuf,

    /// JSON sidecar with roles and type hints; inline flags override it.
    #[arg(long)]
    schema: Option<PathBuf>,

    #[arg(long)]
    label: Option<String>,

    #[arg(long)]
    prediction: Option<String>,

    #[arg(long)]
    group: Option<String>,

    /// Candidate column; repeat to test a block.
    #[arg(long = "candidate")]
    candidates: Vec<String>,

    /// Per-column type hint, e.g. --type workclass=categorical.
    #[arg(long = "type", value_parser = parse_type_hint)]
    types: Vec<(String, ColType)>,

    /// Cardinality cap for one-hot expansion of categoricals.
    #[arg(long, default_value_t = dataset::DEFAULT_MAX_ONEHOT)]
    max_onehot: usize,
}

fn parse_type_hint(s: &str) -> std::result::Result<(String, ColType), String> {
    let (col, ty) = s
        .split_once('=')
        .ok_or_else(|| format!("expected COLUMN=numeric|categorical, got '{s}'"))?;
    let ty = match ty {
        "numeric" => ColType::Numeric,
        "categorical" => ColType::Categorical,
        other => return Err(format!("unknown column type '{other}'")),
    };
    Ok((col.to_string(), ty))
}

#[derive(Args)]
struct RegressorArgs {
    /// Boosting rounds for the regressor / learner.
    #[arg(long, default_value_t = 50)]
    rounds: usize,

    #[arg(long, default_value_t = 2)]
    depth: usize,

    #[arg(long, default_value_t = 0.1)]
    rate: f64,

    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
}

impl RegressorArgs {
    fn params(&self, loss: BoostLoss, seed: u64) -> BoostParams {
        BoostParams {
            n_rounds: self.rounds,
            max_depth: self.depth,
            learning_rate: self.rate,
            min_leaf: self.min_leaf,
            loss,
            seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test whether candidate columns could reduce the loss of the
    /// predictor whose outputs are in the prediction column.
    Test {
        #[command(flatten)]
        data: DataArgs,

        #[arg(long)]
        loss: String,

        #[arg(long, default_value_t = 100)]
        bootstrap: usize,

        #[arg(long, default_value_t = 0.05)]
        alpha: f64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[command(flatten)]
        regressor: RegressorArgs,

        #[arg(long)]
        out: PathBuf,
    },

    /// Per-feature ablation study: actual re-training utility vs the
    /// predicted utility from the test.
    Ablate {
        #[command(flatten)]
        data: DataArgs,

        #[arg(long)]
        loss: String,

        #[arg(long, default_value_t = 10)]
        folds: usize,

        #[arg(long, default_value_t = 100)]
        bootstrap: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Use training-set predictions for the gradient instead of
        /// out-of-fold predictions.
        #[arg(long)]
        training_gradients: bool,

        /// Actual-utility percentage above which a p > 0.05 feature
        /// counts as missed in the recall summary.
        #[arg(long, default_value_t = 20.0)]
        recall_threshold: f64,

        #[command(flatten)]
        regressor: RegressorArgs,

        #[arg(long)]
        out: PathBuf,

        /// Optional plot-ready CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },

    /// Heuristic feature-scoring baselines (chi-squared, gain ratio,
    /// CFS merit).
    Baselines {
        #[command(flatten)]
        data: DataArgs,

        #[arg(long, default_value_t = 10)]
        bins: usize,

        #[arg(long)]
        out: PathBuf,
    },

    /// Empirical level check of the test on simulated null data.
    Calibrate {
        #[arg(long, default_value_t = 500)]
        n: usize,

        #[arg(long, default_value_t = 200)]
        reps: usize,

        #[arg(long, default_value_t = 0.05)]
        alpha: f64,

        #[arg(long, default_value_t = 100)]
        bootstrap: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[command(flatten)]
        regressor: RegressorArgs,

        #[arg(long)]
        out: PathBuf,
    },
}

impl DataArgs {
    fn schema(&self) -> Result<Schema> {
        let mut schema = match &self.schema {
            Some(path) => Schema::from_json_file(path)?,
            None => Schema::new(""),
        };
        if let Some(l) = &self.label {
            schema.label = l.clone();
        }
        if let Some(p) = &self.prediction {
            schema.prediction = Some(p.clone());
        }
        if let Some(g) = &self.group {
            schema.group = Some(g.clone());
        }
        if !self.candidates.is_empty() {
            schema.candidates = self.candidates.clone();
        }
        for (col, ty) in &self.types {
            schema.types.insert(col.clone(), *ty);
        }
        schema.max_onehot = self.max_onehot;
        Ok(schema)
    }
}

enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Run the CLI on an argument list. Returns the process exit status:
/// 0 success, 2 usage error, 1 data error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    let workers = std::env::var("FEATPROBE_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.workers);
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            builder = builder.num_threads(w);
        }
        match builder.build() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: cannot build worker pool: {e}");
                return EXIT_DATA;
            }
        }
    };

    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn parse_loss(s: &str) -> std::result::Result<LossId, CliError> {
    s.parse::<LossId>().map_err(|e| usage(e.to_string()))
}

fn load(data: &DataArgs, require_label: bool) -> std::result::Result<(Dataset, Schema), CliError> {
    let schema = data.schema()?;
    if require_label && schema.label.is_empty() {
        return Err(usage("--label is required (or set it in --schema)"));
    }
    let ds = dataset::load_csv(&data.data, &schema)?;
    Ok((ds, schema))
}

fn write_out(path: &PathBuf, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn dispatch(cli: &Cli) -> std::result::Result<(), CliError> {
    match &cli.command {
        Command::Test {
            data,
            loss,
            bootstrap,
            alpha,
            seed,
            regressor,
            out,
        } => {
            let loss = parse_loss(loss)?;
            if data.label.is_none() && data.schema.is_none() {
                return Err(usage("--label is required"));
            }
            let schema = data.schema()?;
            if schema.label.is_empty() {
                return Err(usage("--label is required"));
            }
            if schema.prediction.is_none() {
                return Err(usage("--prediction is required for the test command"));
            }
            if schema.candidates.is_empty() {
                return Err(usage("at least one --candidate is required"));
            }
            if loss == LossId::Ndcg && schema.group.is_none() {
                return Err(usage("--group is required when --loss ndcg"));
            }

            let ds = dataset::load_csv(&data.data, &schema)?;
            let pred = ds
                .numeric(schema.prediction.as_deref().unwrap())
                .map_err(CliError::Data)?
                .to_vec();
            let grad = harness::task_gradient(&ds, &pred, loss)?;

            let mut candidate_cols = Vec::new();
            let mut candidate_names = Vec::new();
            for c in &schema.candidates {
                candidate_cols.extend(ds.block(c)?);
                candidate_names.extend(ds.block_names(c));
            }
            let config = TestConfig {
                n_bootstrap: *bootstrap,
                alpha: *alpha,
                regressor: regressor.params(BoostLoss::Squared, *seed),
                seed: *seed,
            };
            let result = relevance_test(&candidate_cols, &candidate_names, &grad, &config)?;
            write_out(out, &format!("{}\n", result.to_json()?))?;

            println!("candidate        : {}", result.candidate_names.join(", "));
            println!("n                : {}", result.n);
            println!("statistic v      : {:.6}", result.statistic_v);
            println!("null mean / std  : {:.6} / {:.6}", result.null_mean, result.null_std);
            println!("p-value          : {:.4}", result.p_value);
            println!("p-value (smooth) : {:.4}", result.p_smoothed);
            println!("utility score    : {:.4}", result.utility_score);
            println!(
                "decision         : {} at alpha {}",
                if result.rejects_at(*alpha) { "REJECT null (feature useful)" } else { "keep null" },
                alpha
            );
            Ok(())
        }

        Command::Ablate {
            data,
            loss,
            folds,
            bootstrap,
            seed,
            training_gradients,
            recall_threshold,
            regressor,
            out,
            csv,
        } => {
            let loss = parse_loss(loss)?;
            let (ds, schema) = load(data, true)?;
            if loss == LossId::Ndcg && schema.group.is_none() {
                return Err(usage("--group is required when --loss ndcg"));
            }
            let folds = dataset::split_folds(&ds, *folds, *seed)?;
            let learner = regressor.params(BoostLoss::Squared, *seed);
            let test = TestConfig {
                n_bootstrap: *bootstrap,
                alpha: 0.05,
                regressor: regressor.params(BoostLoss::Squared, *seed),
                seed: *seed,
            };
            let raw = harness::ablation_study(&ds, loss, &learner, &test, &folds, *training_gradients)?;
            let dataset_name = data
                .data
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let report = harness::compare_report(&dataset_name, loss, &raw, *recall_threshold)?;
            write_out(out, &format!("{}\n", report.to_json()?))?;
            if let Some(csv_path) = csv {
                write_out(csv_path, &report.to_csv())?;
            }
            print!("{}", report.to_table());
            println!(
                "recall: {} feature(s) with p > 0.05 above {}% actual utility",
                report.recall_summary.missed, report.recall_summary.threshold_pct
            );
            Ok(())
        }

        Command::Baselines { data, bins, out } => {
            let (ds, _) = load(data, true)?;
            let bins = BinningSpec { n_bins: *bins };
            let label = ds.label()?;
            let label_cats = baselines::discretize(label, &bins)?;

            let feature_cols: Vec<(String, &[f64])> = ds
                .feature_names()
                .iter()
                .flat_map(|name| {
                    ds.block_names(name)
                        .into_iter()
                        .filter_map(|col| ds.numeric(&col).ok().map(|v| (col.clone(), v)))
                        .collect::<Vec<_>>()
                })
                .collect();

            let mut scores: Vec<BaselineScore> = Vec::new();
            for (name, col) in &feature_cols {
                let cats = baselines::discretize(col, &bins)?;
                scores.push(BaselineScore {
                    feature: name.clone(),
                    method: "chi_squared".into(),
                    score: baselines::chi_squared_score(&cats, &label_cats),
                });
                scores.push(BaselineScore {
                    feature: name.clone(),
                    method: "gain_ratio".into(),
                    score: baselines::gain_ratio_score(&cats, &label_cats),
                });
                let selected: Vec<&[f64]> = feature_cols
                    .iter()
                    .filter(|(n, _)| n != name)
                    .map(|(_, v)| *v)
                    .collect();
                let merit = baselines::cfs_merit(col, &selected, label);
                scores.push(BaselineScore {
                    feature: name.clone(),
                    method: "cfs_merit".into(),
                    score: merit.merit,
                });
                scores.push(BaselineScore {
                    feature: name.clone(),
                    method: "cfs_delta".into(),
                    score: merit.delta,
                });
            }
            let json = serde_json::to_string_pretty(&scores).map_err(Error::from)?;
            write_out(out, &format!("{json}\n"))?;
            for s in &scores {
                println!("{:<24} {:<12} {:.6}", s.feature, s.method, s.score);
            }
            Ok(())
        }

        Command::Calibrate {
            n,
            reps,
            alpha,
            bootstrap,
            seed,
            regressor,
            out,
        } => {
            let test = TestConfig {
                n_bootstrap: *bootstrap,
                alpha: *alpha,
                regressor: regressor.params(BoostLoss::Squared, *seed),
                seed: *seed,
            };
            let summary = harness::null_calibration(*n, *reps, &test)?;
            if let Some(w) = &summary.warning {
                eprintln!("warning: {w}");
            }
            let json = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
            write_out(out, &format!("{json}\n"))?;
            println!(
                "rejection rate {:.4} at alpha {} over {} reps (95% CI [{:.4}, {:.4}])",
                summary.rejection_rate, summary.alpha, summary.reps, summary.ci_low, summary.ci_high
            );
            Ok(())
        }
    }
}
