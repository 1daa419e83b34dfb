use std::path::Path;
use std::time::Instant;

use cvboost::boosting::{fit_with_callback, Loss, Metric};
use cvboost::dataset::{load_csv, load_csv_features, read_schema};
use cvboost::experiments::{
    run_ablation, run_bias_experiment, run_error_benchmark, ExperimentReport, Method, StroblConfig,
};
use cvboost::importance::{
    cover_importance, gain_importance, permutation_importance, split_count_importance, EvalSet,
};
use cvboost::{BoostParams, Dataset, Ensemble, GrowthParams, Measure, Schema, Task};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::output::{emit, render_csv, write_atomic, Manifest};

/// Options shared by every subcommand.
pub struct Context {
    pub quiet: bool,
    pub record_wall_time: bool,
    started: Instant,
}

impl Context {
    pub fn new(quiet: bool, record_wall_time: bool) -> Self {
        Context { quiet, record_wall_time, started: Instant::now() }
    }

    fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("cvboost: {}", msg.as_ref());
        }
    }

    fn wall_time(&self) -> Option<f64> {
        self.record_wall_time.then(|| self.started.elapsed().as_secs_f64())
    }
}

pub fn run(command: &Command, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::Train(a) => train(a, ctx),
        Command::Predict(a) => predict(a, ctx),
        Command::Importance(a) => importance(a, ctx),
        Command::Simulate(a) => simulate(a, ctx),
        Command::Ablate(a) => ablate(a, ctx),
        Command::Bench(a) => bench(a, ctx),
    }
}

fn loss_for(task: Task) -> Loss {
    match task {
        Task::Regression => Loss::SquaredError,
        Task::BinaryClassification => Loss::LogLoss,
    }
}

fn check_metric(metric: Metric, task: Task, flag: &str) -> Result<(), CliError> {
    let ok = matches!(
        (metric, task),
        (Metric::Mse | Metric::Rmse, Task::Regression) | (Metric::LogLoss, Task::BinaryClassification)
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::usage(format!("{flag} {} does not apply to a {task:?} task", metric.name())))
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn load_model(path: &Path) -> Result<Ensemble<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read model {}: {e}", path.display())))?;
    Ensemble::from_json_str(&text).map_err(|e| CliError::data(format!("model {}: {e}", path.display())))
}

/// Schema describing the columns a fitted model expects.
fn model_schema(model: &Ensemble<f64>) -> Schema {
    Schema {
        columns: model.features.iter().map(|f| (f.name.clone(), f.column_type)).collect(),
        target: model.target_name.clone(),
        task: model.task,
    }
}

fn load_labelled(data: &Path, schema: &Path) -> Result<Dataset<f64>, CliError> {
    let schema = read_schema(schema).map_err(|e| CliError::data(format!("schema {}: {e}", schema.display())))?;
    load_csv(data, &schema).map_err(|e| CliError::data(format!("data {}: {e}", data.display())))
}

fn train(a: &TrainArgs, ctx: &Context) -> Result<(), CliError> {
    let m = &a.model;
    let mut growth = match a.selector {
        SelectorArg::Gain => GrowthParams::train_gain(m.max_depth),
        SelectorArg::Cv => GrowthParams::cross_validated(m.max_depth, m.folds),
    };
    growth.min_samples_leaf = m.min_samples_leaf;
    if let Some(mss) = a.min_samples_split {
        growth.min_samples_split = mss;
    }
    let mut params = BoostParams {
        n_trees: m.trees,
        learning_rate: m.lr,
        growth,
        loss: Loss::SquaredError,
        seed: a.seed,
    };
    params.validate()?;

    let data = load_labelled(&a.data, &a.schema)?;
    params.loss = loss_for(data.task());
    let metric = a.metric.map(Metric::from).unwrap_or_else(|| Metric::default_for(params.loss));
    check_metric(metric, data.task(), "--metric")?;

    let config = json!({
        "data": path_str(&a.data),
        "schema": path_str(&a.schema),
        "selector": format!("{:?}", a.selector).to_lowercase(),
        "seed": a.seed,
        "model": model_json(m),
        "min_samples_split": params.growth.min_samples_split,
        "loss": params.loss,
        "metric": metric,
        "rows": data.n_rows(),
        "features": data.feature_names(),
    });
    let manifest = Manifest::start(Some(&a.out), "train", config)?;
    ctx.progress(format!("training up to {} trees on {} rows", params.n_trees, data.n_rows()));
    let model = fit_with_callback(&data, &params, |stage, _| {
        if stage > 0 && stage % 10 == 0 {
            ctx.progress(format!("tree {stage}/{}", params.n_trees));
        }
    })?;
    let error = model.evaluate(&data, metric)?;
    let mut text = model.to_json_string();
    text.push('\n');
    write_atomic(&a.out, text.as_bytes())?;
    manifest.finish(
        json!({ "n_trees_fitted": model.n_trees_fitted(), "train_error": error, "metric": metric }),
        ctx.wall_time(),
    )?;
    println!("train_{}={} n_trees_fitted={}", metric.name(), error, model.n_trees_fitted());
    Ok(())
}

fn predict(a: &PredictArgs, ctx: &Context) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let raw_data = load_csv_features::<f64>(&a.data, &model_schema(&model))
        .map_err(|e| CliError::data(format!("data {}: {e}", a.data.display())))?;
    let config = json!({ "model": path_str(&a.model), "data": path_str(&a.data) });
    let manifest = Manifest::start(a.out.as_deref(), "predict", config)?;
    let data = model.prepare(&raw_data)?;
    let raw = model.predict_raw(&data)?;
    let bytes = if model.loss == Loss::LogLoss {
        let proba = model.predict_proba(&data)?;
        render_csv(&["raw", "probability"], raw.iter().zip(&proba).map(|(r, p)| [r.to_string(), p.to_string()]))
    } else {
        render_csv(&["raw"], raw.iter().map(|r| [r.to_string()]))
    };
    emit(a.out.as_deref(), &bytes)?;
    manifest.finish(json!({ "rows": raw.len() }), ctx.wall_time())?;
    ctx.progress(format!("scored {} rows", raw.len()));
    Ok(())
}

fn importance(a: &ImportanceArgs, ctx: &Context) -> Result<(), CliError> {
    let measure = Measure::from(a.measure);
    let is_pfi = measure == Measure::Pfi;
    if !is_pfi {
        for (given, flag) in [(a.data.is_some(), "--data"), (a.eval_set.is_some(), "--eval-set"), (a.metric.is_some(), "--metric")] {
            if given {
                return Err(CliError::usage(format!("{flag} only applies to --measure pfi")));
            }
        }
    }
    let (data_path, eval_set) = match (is_pfi, &a.data, a.eval_set) {
        (false, _, _) => (None, None),
        (true, Some(d), Some(e)) => (Some(d), Some(EvalSet::from(e))),
        (true, None, _) => return Err(CliError::usage("--measure pfi requires --data")),
        (true, _, None) => return Err(CliError::usage("--measure pfi requires --eval-set (train or test)")),
    };
    if is_pfi && a.permutations == 0 {
        return Err(CliError::usage("--permutations must be at least 1"));
    }

    let model = load_model(&a.model)?;
    let metric = a.metric.map(Metric::from).unwrap_or_else(|| Metric::default_for(model.loss));
    if is_pfi {
        check_metric(metric, model.task, "--metric")?;
    }
    let mut config = json!({
        "model": path_str(&a.model),
        "measure": measure,
        "format": format!("{:?}", a.format).to_lowercase(),
    });
    if let (Some(d), Some(e)) = (data_path, eval_set) {
        config["data"] = json!(path_str(d));
        config["evaluation_set"] = json!(e);
        config["permutations"] = json!(a.permutations);
        config["seed"] = json!(a.seed);
        config["metric"] = json!(metric);
    }
    let manifest = Manifest::start(a.out.as_deref(), "importance", config)?;

    let report = match measure {
        Measure::Gain => gain_importance(&model),
        Measure::SplitCount => split_count_importance(&model),
        Measure::Cover => cover_importance(&model),
        Measure::Pfi => {
            let path = data_path.expect("checked above");
            let data = load_csv::<f64>(path, &model_schema(&model))
                .map_err(|e| CliError::data(format!("data {}: {e}", path.display())))?;
            let data = model.prepare(&data)?;
            ctx.progress(format!("{} permutations x {} features", a.permutations, model.n_features()));
            permutation_importance(&model, &data, a.permutations, metric, a.seed, eval_set.expect("checked above"))?
        }
    };
    let bytes = match a.format {
        FormatArg::Csv => render_csv(&cvboost::ImportanceReport::<f64>::CSV_HEADER, report.csv_rows()),
        FormatArg::Json => {
            let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
            text.push('\n');
            text.into_bytes()
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    manifest.finish(json!({ "n_trees_fitted": model.n_trees_fitted() }), ctx.wall_time())?;
    Ok(())
}

fn unique_methods(methods: &[Method]) -> Result<(), CliError> {
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(CliError::usage(format!("method {} listed twice", m.name())));
        }
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, ctx: &Context) -> Result<(), CliError> {
    let alpha = match (a.experiment, a.alpha) {
        (ExperimentArg::Power, Some(alpha)) => alpha,
        (ExperimentArg::Power, None) => return Err(CliError::usage("--experiment power requires --alpha")),
        (ExperimentArg::Null, None) => 0.0,
        (ExperimentArg::Null, Some(_)) => {
            return Err(CliError::usage("--alpha only applies to --experiment power"))
        }
    };
    unique_methods(&a.methods)?;
    for (i, m) in a.measures.iter().enumerate() {
        if a.measures[..i].contains(m) {
            return Err(CliError::usage(format!("measure {} listed twice", m.name())));
        }
    }
    let config = StroblConfig {
        n: a.n,
        alpha,
        n_test: a.n_test,
        reps: a.reps,
        seed: a.seed,
        settings: a.model.settings(a.permutations),
        ..StroblConfig::default()
    };
    config.validate()?;
    for method in &a.methods {
        config.settings.boost_params(*method, Loss::LogLoss, 0).validate()?;
    }

    let manifest_config = json!({
        "experiment": format!("{:?}", a.experiment).to_lowercase(),
        "alpha": alpha,
        "reps": a.reps,
        "n": a.n,
        "n_test": a.n_test,
        "cardinalities": config.cardinalities,
        "seed": a.seed,
        "methods": a.methods,
        "measures": a.measures,
        "permutations": a.permutations,
        "model": model_json(&a.model),
        "per_rep": a.per_rep.as_deref().map(path_str),
    });
    let manifest = Manifest::start(Some(&a.out), "simulate", manifest_config)?;
    ctx.progress(format!(
        "{} experiment: {} repetitions x {} method(s)",
        format!("{:?}", a.experiment).to_lowercase(),
        a.reps,
        a.methods.len()
    ));
    let report = run_bias_experiment(&config, &a.methods, &a.measures)?;

    if let Some(path) = &a.per_rep {
        write_atomic(path, &per_rep_csv(&report))?;
    }
    write_atomic(&a.out, &report_csv(&report))?;
    let trees: Value = a
        .methods
        .iter()
        .map(|&m| {
            let per_rep: Vec<usize> =
                report.outcomes.iter().filter(|o| o.method == m).map(|o| o.n_trees_fitted).collect();
            (m.name().to_string(), json!(per_rep))
        })
        .collect::<serde_json::Map<_, _>>()
        .into();
    manifest.finish(json!({ "summaries": report.summaries, "n_trees_fitted_per_rep": trees }), ctx.wall_time())?;
    for s in &report.summaries {
        ctx.progress(format!(
            "{}: mean trees {:.2}, mean test log-loss {:.4}",
            s.method.name(),
            s.mean_n_trees_fitted,
            s.mean_test_logloss
        ));
    }
    Ok(())
}

fn report_csv(report: &ExperimentReport) -> Vec<u8> {
    render_csv(
        &["method", "measure", "feature", "mean", "std", "reps", "raw_mean", "raw_std"],
        report.rows.iter().map(|r| {
            [
                r.method.name().to_string(),
                r.measure.name().to_string(),
                r.feature.clone(),
                r.mean.to_string(),
                r.std.to_string(),
                r.reps.to_string(),
                r.raw_mean.to_string(),
                r.raw_std.to_string(),
            ]
        }),
    )
}

fn per_rep_csv(report: &ExperimentReport) -> Vec<u8> {
    let names: Vec<String> = (0..)
        .map(|j| format!("X{j}"))
        .take(report.outcomes.first().and_then(|o| o.scores.first()).map_or(0, |s| s.1.len()))
        .collect();
    let mut rows = Vec::new();
    for o in &report.outcomes {
        for (measure, raw, scaled) in &o.scores {
            for (j, name) in names.iter().enumerate() {
                rows.push([
                    o.rep.to_string(),
                    o.method.name().to_string(),
                    o.n_trees_fitted.to_string(),
                    o.test_logloss.to_string(),
                    measure.name().to_string(),
                    name.clone(),
                    raw[j].to_string(),
                    scaled[j].to_string(),
                ]);
            }
        }
    }
    render_csv(
        &["rep", "method", "n_trees_fitted", "test_logloss", "measure", "feature", "raw", "scaled"],
        rows,
    )
}

/// Loads the data and resolves the metric for ablate / bench.
fn kfold_setup(k: &KFoldArgs) -> Result<(Dataset<f64>, Metric), CliError> {
    unique_methods(&k.methods)?;
    if k.kfolds < 2 {
        return Err(CliError::usage("--kfolds must be at least 2"));
    }
    let settings = k.model.settings(0);
    for method in &k.methods {
        settings.boost_params(*method, Loss::SquaredError, 0).validate()?;
    }
    let data = load_labelled(&k.data, &k.schema)?;
    let metric = match (k.metric, data.task()) {
        (Some(m), _) => Metric::from(m),
        (None, Task::Regression) => Metric::Rmse,
        (None, Task::BinaryClassification) => Metric::LogLoss,
    };
    check_metric(metric, data.task(), "--metric")?;
    Ok((data, metric))
}

fn kfold_json(k: &KFoldArgs, metric: Metric) -> Value {
    json!({
        "data": path_str(&k.data),
        "schema": path_str(&k.schema),
        "kfolds": k.kfolds,
        "methods": k.methods,
        "metric": metric,
        "seed": k.seed,
        "model": model_json(&k.model),
    })
}

fn ablate(a: &AblateArgs, ctx: &Context) -> Result<(), CliError> {
    let k = &a.kfold;
    let (data, metric) = kfold_setup(k)?;
    data.drop_features(&a.drop)?;
    let mut config = kfold_json(k, metric);
    config["drop"] = json!(a.drop);
    let manifest = Manifest::start(Some(&a.out), "ablate", config)?;
    ctx.progress(format!("{}-fold ablation dropping {}", k.kfolds, a.drop.join(",")));
    let rows = run_ablation(&data, &a.drop, k.kfolds, &k.methods, &k.model.settings(0), metric, k.seed)?;
    let bytes = render_csv(
        &["method", "feature_set", "fold", "error"],
        rows.iter().map(|r| [r.method.name().to_string(), r.feature_set.clone(), r.fold.to_string(), r.error.to_string()]),
    );
    write_atomic(&a.out, &bytes)?;
    manifest.finish(json!({ "rows": rows.len() }), ctx.wall_time())?;
    Ok(())
}

fn bench(a: &BenchArgs, ctx: &Context) -> Result<(), CliError> {
    let k = &a.kfold;
    let (data, metric) = kfold_setup(k)?;
    if a.log_target && data.task() != Task::Regression {
        return Err(CliError::usage("--log-target applies to regression data only"));
    }
    let mut config = kfold_json(k, metric);
    config["log_target"] = json!(a.log_target);
    config["per_fold"] = json!(a.per_fold.as_deref().map(path_str));
    let manifest = Manifest::start(Some(&a.out), "bench", config)?;
    ctx.progress(format!("{}-fold benchmark on {} rows", k.kfolds, data.n_rows()));
    let table =
        run_error_benchmark(&data, k.kfolds, &k.methods, &k.model.settings(0), metric, a.log_target, k.seed)?;
    if let Some(path) = &a.per_fold {
        let bytes = render_csv(
            &["method", "fold", "error"],
            table.per_fold.iter().map(|r| [r.method.name().to_string(), r.fold.to_string(), r.error.to_string()]),
        );
        write_atomic(path, &bytes)?;
    }
    let bytes = render_csv(
        &["method", "metric", "mean", "std", "folds"],
        table.summary.iter().map(|s| {
            [s.method.name().to_string(), metric.name().to_string(), s.mean.to_string(), s.std.to_string(), s.folds.to_string()]
        }),
    );
    write_atomic(&a.out, &bytes)?;
    manifest.finish(json!({ "summary": table.summary }), ctx.wall_time())?;
    for s in &table.summary {
        ctx.progress(format!("{}: {} {:.4} ± {:.4}", s.method.name(), metric.name(), s.mean, s.std));
    }
    Ok(())
}
