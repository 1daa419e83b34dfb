use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{fit, Ensemble, Loss, Metric};
use crate::dataset::{Column, Dataset, Task};
use crate::importance::{
    cover_importance, gain_importance, permutation_importance, split_count_importance, EvalSet,
    ImportanceReport,
};
use crate::seed::{derive_seed, rng_for};

use super::{mean_std, ExpMeasure, ExperimentError, Method, ModelSettings};

const SIM_STREAM: u64 = 0x53494d;
const FIT_STREAM: u64 = 0x464954;
const PFI_STREAM: u64 = 0x504649;

/// Power-case alphabet size of X1 and the codes mapped to `Ber(0.5 + alpha)`.
const POWER_ALPHABET: u32 = 10;
const POWER_HIGH_CODES: u32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StroblConfig {
    pub n: usize,
    pub cardinalities: Vec<usize>,
    /// 0 gives the null case.
    pub alpha: f64,
    pub n_test: usize,
    pub reps: usize,
    pub seed: u64,
    pub settings: ModelSettings,
}

impl Default for StroblConfig {
    fn default() -> Self {
        StroblConfig {
            n: 6000,
            cardinalities: vec![10, 20, 50, 100],
            alpha: 0.0,
            n_test: 2000,
            reps: 100,
            seed: 0,
            settings: ModelSettings::default(),
        }
    }
}

impl StroblConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(0.0..=0.5).contains(&self.alpha) {
            return Err(ExperimentError::InvalidConfig(format!("alpha must lie in [0, 0.5], got {}", self.alpha)));
        }
        if self.cardinalities.iter().any(|&k| k < 2) {
            return Err(ExperimentError::InvalidConfig("cardinalities must all be at least 2".into()));
        }
        if self.alpha > 0.0 && self.cardinalities.first() != Some(&(POWER_ALPHABET as usize)) {
            return Err(ExperimentError::InvalidConfig("the power case needs X1 with 10 categories".into()));
        }
        if self.n < 2 * self.settings.folds {
            return Err(ExperimentError::InvalidConfig("n too small for the fold count".into()));
        }
        Ok(())
    }
}

/// X0 ~ N(0, 1) followed by one uniform categorical column per cardinality.
/// The target is left at zero.
pub fn gen_strobl_features<R: Rng>(n: usize, cardinalities: &[usize], rng: &mut R) -> Dataset<f64> {
    let mut names = vec!["X0".to_string()];
    let mut columns = vec![Column::Numeric((0..n).map(|_| rng.sample(StandardNormal)).collect())];
    for (j, &k) in cardinalities.iter().enumerate() {
        names.push(format!("X{}", j + 1));
        columns.push(Column::Categorical {
            codes: (0..n).map(|_| rng.random_range(0..k as u32)).collect(),
            labels: (0..k).map(|c| c.to_string()).collect(),
        });
    }
    Dataset::new(names, columns, vec![0.0; n], "Y", Task::BinaryClassification)
        .expect("generated columns share one length")
}

/// i.i.d. Bernoulli(0.5), independent of everything else.
pub fn gen_null_target<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect()
}

/// `Ber(0.5 + alpha)` for X1 codes 0..=4 and `Ber(0.5 - alpha)` for 5..=9.
pub fn gen_power_target<R: Rng>(x1_codes: &[u32], alpha: f64, rng: &mut R) -> Result<Vec<f64>, ExperimentError> {
    if let Some(&bad) = x1_codes.iter().find(|&&c| c >= POWER_ALPHABET) {
        return Err(ExperimentError::CardinalityMismatch(bad));
    }
    if !(0.0..=0.5).contains(&alpha) {
        return Err(ExperimentError::InvalidConfig(format!("alpha must lie in [0, 0.5], got {alpha}")));
    }
    Ok(x1_codes
        .iter()
        .map(|&c| {
            let p = if c < POWER_HIGH_CODES { 0.5 + alpha } else { 0.5 - alpha };
            if rng.random_bool(p) { 1.0 } else { 0.0 }
        })
        .collect())
}

fn gen_split<R: Rng>(config: &StroblConfig, n: usize, rng: &mut R) -> Result<Dataset<f64>, ExperimentError> {
    let features = gen_strobl_features(n, &config.cardinalities, rng);
    let y = if config.alpha == 0.0 {
        gen_null_target(n, rng)
    } else {
        let Column::Categorical { codes, .. } = features.column(1) else { unreachable!() };
        gen_power_target(codes, config.alpha, rng)?
    };
    Ok(features.with_target(y))
}

/// Train and test sets of repetition `rep`; depend only on `(seed, rep)`.
pub fn repetition_data(config: &StroblConfig, rep: usize) -> Result<(Dataset<f64>, Dataset<f64>), ExperimentError> {
    let mut rng = rng_for(&[SIM_STREAM, config.seed, rep as u64]);
    let train = gen_split(config, config.n, &mut rng)?;
    let test = gen_split(config, config.n_test, &mut rng)?;
    Ok((train, test))
}

/// Results of one method on one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: usize,
    pub method: Method,
    pub n_trees_fitted: usize,
    pub test_logloss: f64,
    /// `(measure, raw, scaled)` per requested measure.
    pub scores: Vec<(ExpMeasure, Vec<f64>, Vec<f64>)>,
}

fn measure_report(
    model: &Ensemble<f64>,
    measure: ExpMeasure,
    train: &Dataset<f64>,
    test: &Dataset<f64>,
    n_permutations: usize,
    seed: u64,
) -> Result<ImportanceReport<f64>, ExperimentError> {
    Ok(match measure {
        ExpMeasure::Gain => gain_importance(model),
        ExpMeasure::SplitCount => split_count_importance(model),
        ExpMeasure::Cover => cover_importance(model),
        ExpMeasure::PfiTrain => {
            permutation_importance(model, train, n_permutations, Metric::LogLoss, seed, EvalSet::Train)?
        }
        ExpMeasure::PfiTest => {
            permutation_importance(model, test, n_permutations, Metric::LogLoss, seed, EvalSet::Test)?
        }
    })
}

/// Runs every method on repetition `rep`.
pub fn simulate_repetition(
    config: &StroblConfig,
    rep: usize,
    methods: &[Method],
    measures: &[ExpMeasure],
) -> Result<Vec<RepOutcome>, ExperimentError> {
    let (train, test) = repetition_data(config, rep)?;
    methods
        .iter()
        .map(|&method| {
            let fit_seed = derive_seed(&[FIT_STREAM, config.seed, rep as u64]);
            let params = config.settings.boost_params(method, Loss::LogLoss, fit_seed);
            let model = fit(&train, &params)?;
            let pfi_seed = derive_seed(&[PFI_STREAM, config.seed, rep as u64, method as u64]);
            let scores = measures
                .iter()
                .map(|&m| {
                    let r = measure_report(&model, m, &train, &test, config.settings.n_permutations, pfi_seed)?;
                    Ok((m, r.raw, r.scaled))
                })
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            Ok(RepOutcome {
                rep,
                method,
                n_trees_fitted: model.n_trees_fitted(),
                test_logloss: model.evaluate(&test, Metric::LogLoss)?,
                scores,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub measure: ExpMeasure,
    pub feature: String,
    /// Mean and standard deviation of the scaled score across repetitions.
    pub mean: f64,
    pub std: f64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_n_trees_fitted: f64,
    pub max_n_trees_fitted: usize,
    pub mean_test_logloss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<MethodSummary>,
    pub outcomes: Vec<RepOutcome>,
}

impl ExperimentReport {
    pub fn row(&self, method: Method, measure: ExpMeasure, feature: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.measure == measure && r.feature == feature)
    }

    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Mean/std per (method, measure, feature) over repetition outcomes.
pub fn aggregate(
    outcomes: Vec<RepOutcome>,
    feature_names: &[String],
    methods: &[Method],
    measures: &[ExpMeasure],
) -> ExperimentReport {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &method in methods {
        let mine: Vec<&RepOutcome> = outcomes.iter().filter(|o| o.method == method).collect();
        for &measure in measures {
            let per_rep: Vec<(&Vec<f64>, &Vec<f64>)> = mine
                .iter()
                .filter_map(|o| o.scores.iter().find(|s| s.0 == measure).map(|s| (&s.1, &s.2)))
                .collect();
            for (j, feature) in feature_names.iter().enumerate() {
                let scaled: Vec<f64> = per_rep.iter().map(|(_, s)| s[j]).collect();
                let raw: Vec<f64> = per_rep.iter().map(|(r, _)| r[j]).collect();
                let (mean, std) = mean_std(&scaled);
                let (raw_mean, raw_std) = mean_std(&raw);
                rows.push(ReportRow {
                    method,
                    measure,
                    feature: feature.clone(),
                    mean,
                    std,
                    raw_mean,
                    raw_std,
                    reps: per_rep.len(),
                });
            }
        }
        let trees: Vec<f64> = mine.iter().map(|o| o.n_trees_fitted as f64).collect();
        let losses: Vec<f64> = mine.iter().map(|o| o.test_logloss).collect();
        summaries.push(MethodSummary {
            method,
            mean_n_trees_fitted: mean_std(&trees).0,
            max_n_trees_fitted: mine.iter().map(|o| o.n_trees_fitted).max().unwrap_or(0),
            mean_test_logloss: mean_std(&losses).0,
        });
    }
    ExperimentReport { rows, summaries, outcomes }
}

/// Runs all repetitions (in parallel on the current rayon pool) and
/// aggregates them in repetition order.
pub fn run_bias_experiment(
    config: &StroblConfig,
    methods: &[Method],
    measures: &[ExpMeasure],
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let per_rep: Vec<Vec<RepOutcome>> = (0..config.reps)
        .into_par_iter()
        .map(|r| simulate_repetition(config, r, methods, measures))
        .collect::<Result<_, _>>()?;
    let names: Vec<String> = (0..=config.cardinalities.len()).map(|j| format!("X{j}")).collect();
    Ok(aggregate(per_rep.into_iter().flatten().collect(), &names, methods, measures))
}
