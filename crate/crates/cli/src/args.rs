use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvboost::experiments::{ExpMeasure, Method, ModelSettings};
use cvboost::importance::EvalSet;
use cvboost::{Measure, Metric};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "cvboost", version, about = "Gradient boosting with cross-validated split selection")]
pub struct Cli {
    /// Worker threads for repetitions, folds and permutation grids
    /// (defaults to the number of available cores).
    #[arg(long, global = true, env = "CVBOOST_JOBS")]
    pub jobs: Option<usize>,

    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Record elapsed wall-clock time in the run manifest. Off by default so
    /// manifests of identical runs are byte-identical.
    #[arg(long, global = true)]
    pub record_wall_time: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a boosted ensemble and write it as JSON.
    Train(TrainArgs),
    /// Score a CSV with a fitted model.
    Predict(PredictArgs),
    /// Feature importance of a fitted model.
    Importance(ImportanceArgs),
    /// High-cardinality bias simulation (null or power case).
    Simulate(SimulateArgs),
    /// K-fold errors with and without a set of features.
    Ablate(AblateArgs),
    /// K-fold error benchmark of the selection methods.
    Bench(BenchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Importance(_) => "importance",
            Command::Simulate(_) => "simulate",
            Command::Ablate(_) => "ablate",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectorArg {
    /// Highest training gain (classic CART).
    Gain,
    /// Lowest cross-validated held-out error.
    Cv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Mse,
    Rmse,
    Logloss,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Mse => Metric::Mse,
            MetricArg::Rmse => Metric::Rmse,
            MetricArg::Logloss => Metric::LogLoss,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Gain,
    SplitCount,
    Cover,
    Pfi,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Measure {
        match m {
            MeasureArg::Gain => Measure::Gain,
            MeasureArg::SplitCount => Measure::SplitCount,
            MeasureArg::Cover => Measure::Cover,
            MeasureArg::Pfi => Measure::Pfi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalSetArg {
    Train,
    Test,
}

impl From<EvalSetArg> for EvalSet {
    fn from(e: EvalSetArg) -> EvalSet {
        match e {
            EvalSetArg::Train => EvalSet::Train,
            EvalSetArg::Test => EvalSet::Test,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    /// Target independent of every feature.
    Null,
    /// Target depends on X1 only, with strength --alpha.
    Power,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("unknown method `{s}` (expected cvb or gain)"))
}

fn parse_exp_measure(s: &str) -> Result<ExpMeasure, String> {
    ExpMeasure::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ExpMeasure::ALL.iter().map(|m| m.name()).collect();
        format!("unknown measure `{s}` (expected one of {})", names.join(", "))
    })
}

/// Hyper-parameters shared by the experiment commands.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of boosting iterations.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Shrinkage applied to every tree.
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    /// Folds used by cross-validated split selection.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Minimum rows in each child.
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
}

impl ModelArgs {
    pub fn settings(&self, n_permutations: usize) -> ModelSettings {
        ModelSettings {
            n_trees: self.trees,
            learning_rate: self.lr,
            max_depth: self.max_depth,
            folds: self.folds,
            min_samples_leaf: self.min_samples_leaf,
            n_permutations,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON schema naming the target, the task and every column's type.
    #[arg(long)]
    pub schema: PathBuf,
    /// Split selection rule.
    #[arg(long, value_enum)]
    pub selector: SelectorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Minimum rows for a node to be split (default 2, or 2 x folds with --selector cv).
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    /// Metric for the reported training error (default: mse or logloss by task).
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV holding the model's feature columns; the target column is optional.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    /// Labelled CSV to permute (pfi only).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Whether --data is the training or a held-out set (pfi only).
    #[arg(long, value_enum)]
    pub eval_set: Option<EvalSetArg>,
    /// Shuffles per feature (pfi only).
    #[arg(long, default_value_t = 20)]
    pub permutations: usize,
    /// Seed of the permutation shuffles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Error metric for pfi (default: mse or logloss by task).
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentArg,
    /// Signal strength of the power case: P(Y=1) = 0.5 + alpha for X1 codes 0-4, 0.5 - alpha otherwise.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Training rows per repetition.
    #[arg(long, default_value_t = 6000)]
    pub n: usize,
    /// Fresh test rows per repetition (test-set pfi).
    #[arg(long, default_value_t = 2000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated methods: cvb, gain.
    #[arg(long, value_delimiter = ',', default_value = "cvb,gain", value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Comma-separated measures: gain, split-count, cover, pfi-train, pfi-test.
    #[arg(long, value_delimiter = ',', default_value = "gain,split-count,cover,pfi-train,pfi-test", value_parser = parse_exp_measure)]
    pub measures: Vec<ExpMeasure>,
    #[arg(long, default_value_t = 20)]
    pub permutations: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Aggregated report CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-repetition score CSV.
    #[arg(long)]
    pub per_rep: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KFoldArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub kfolds: usize,
    /// Comma-separated methods: cvb, gain.
    #[arg(long, value_delimiter = ',', default_value = "cvb,gain", value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Test-error metric (default: rmse for regression, logloss for binary).
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub kfold: KFoldArgs,
    /// Comma-separated features removed in the reduced model.
    #[arg(long, value_delimiter = ',', required = true)]
    pub drop: Vec<String>,
    /// Output CSV: method, feature_set, fold, error.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub kfold: KFoldArgs,
    /// Replace the regression target by its natural logarithm.
    #[arg(long)]
    pub log_target: bool,
    /// Summary CSV: method, metric, mean, std, folds.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-fold CSV: method, fold, error.
    #[arg(long)]
    pub per_fold: Option<PathBuf>,
}

pub fn model_json(m: &ModelArgs) -> Value {
    json!({
        "trees": m.trees,
        "lr": m.lr,
        "max_depth": m.max_depth,
        "folds": m.folds,
        "min_samples_leaf": m.min_samples_leaf,
    })
}
