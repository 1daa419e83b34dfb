//! Boosting loop: loss derivatives, leaf steps, monotone training loss,
//! early stopping and model persistence.

use cvboost::boosting::{fit, fit_with_callback, leaf_step, negative_gradient, LEAF_STEP_CLAMP};
use cvboost::seed::rng_for;
use cvboost::tree::grow_tree;
use cvboost::{BoostParams, Column, Dataset, Ensemble, GrowthParams, Loss, Metric, Task};
use rand::Rng;

fn regression_data(seed: u64, n: usize) -> Dataset<f64> {
    let mut rng = rng_for(&[0xB005, seed]);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let c: Vec<u32> = (0..n).map(|_| rng.random_range(0..6)).collect();
    let y: Vec<f64> = x
        .iter()
        .zip(&c)
        .map(|(&v, &c)| v * v - 0.5 * v + f64::from(c % 2) + 0.3 * rng.random::<f64>())
        .collect();
    Dataset::new(
        vec!["x".into(), "c".into()],
        vec![Column::Numeric(x), Column::Categorical { codes: c, labels: (0..6).map(|i| i.to_string()).collect() }],
        y,
        "y",
        Task::Regression,
    )
    .unwrap()
}

fn binary_data(seed: u64, n: usize) -> Dataset<f64> {
    let mut rng = rng_for(&[0xB1A, seed]);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let c: Vec<u32> = (0..n).map(|_| rng.random_range(0..8)).collect();
    let y: Vec<f64> = x
        .iter()
        .zip(&c)
        .map(|(&v, &c)| {
            let p = 1.0 / (1.0 + (-(1.5 * v + if c < 3 { 1.0 } else { -0.5 })).exp());
            f64::from(u8::from(rng.random::<f64>() < p))
        })
        .collect();
    Dataset::new(
        vec!["x".into(), "c".into()],
        vec![Column::Numeric(x), Column::Categorical { codes: c, labels: (0..8).map(|i| i.to_string()).collect() }],
        y,
        "y",
        Task::BinaryClassification,
    )
    .unwrap()
}

fn mse(y: &[f64], raw: &[f64]) -> f64 {
    y.iter().zip(raw).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

#[test]
fn training_mse_never_increases() {
    for seed in 0..20 {
        let data = regression_data(seed, 150 + 10 * seed as usize);
        let growth = if seed % 2 == 0 { GrowthParams::train_gain(3) } else { GrowthParams::cross_validated(3, 5) };
        let params = BoostParams { n_trees: 60, learning_rate: 0.05 + 0.04 * (seed % 5) as f64, growth, seed, ..Default::default() };
        let mut history = Vec::new();
        fit_with_callback(&data, &params, |_, raw| history.push(mse(data.target(), raw))).unwrap();
        for (m, w) in history.windows(2).enumerate() {
            assert!(w[1] <= w[0], "seed {seed}: MSE rose at iteration {}: {} -> {}", m + 1, w[0], w[1]);
        }
    }
}

fn central_difference(loss: Loss, y: f64, f: f64) -> f64 {
    let h = 1e-5;
    -(loss.value(y, f + h) - loss.value(y, f - h)) / (2.0 * h)
}

#[test]
fn negative_gradient_matches_finite_differences() {
    let mut rng = rng_for(&[0x9AD]);
    for _ in 0..500 {
        let raw: Vec<f64> = (0..8).map(|_| rng.random_range(-6.0..6.0)).collect();
        let reg: Vec<f64> = (0..8).map(|_| rng.random_range(-10.0..10.0)).collect();
        let bin: Vec<f64> = (0..8).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        for (loss, y) in [(Loss::SquaredError, &reg), (Loss::LogLoss, &bin)] {
            let g = negative_gradient(loss, y, &raw);
            for i in 0..8 {
                let fd = central_difference(loss, y[i], raw[i]);
                assert!((g[i] - fd).abs() < 1e-6, "{loss:?}: analytic {} vs numeric {fd}", g[i]);
            }
        }
    }
}

#[test]
fn gradient_examples() {
    assert_eq!(negative_gradient(Loss::SquaredError, &[1.0, 0.0], &[0.0, 1.0]), vec![1.0, -1.0]);
    assert_eq!(negative_gradient(Loss::SquaredError, &[1.0, 0.0], &[0.0, 0.0]), vec![1.0, 0.0]);
    assert_eq!(negative_gradient(Loss::LogLoss, &[1.0, 0.0], &[0.0, 0.0]), vec![0.5, -0.5]);
}

/// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    while hi - lo > 1e-10 {
        if f(a) < f(b) {
            hi = b;
            b = a;
            a = hi - phi * (hi - lo);
        } else {
            lo = a;
            a = b;
            b = lo + phi * (hi - lo);
        }
    }
    (lo + hi) / 2.0
}

/// Leaves as they arise during boosting: dozens to hundreds of rows whose labels
/// are drawn around the current scores with a bounded shift, both classes present.
#[test]
fn log_loss_leaf_step_is_near_line_search_optimum() {
    let mut rng = rng_for(&[0x601D]);
    let clamp = LEAF_STEP_CLAMP;
    let mut worst = 0.0f64;
    let mut leaves = 0;
    while leaves < 100 {
        let n = rng.random_range(30..300);
        let shift = rng.random_range(-0.5..0.5);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let y: Vec<f64> = raw
            .iter()
            .map(|&f| {
                let p = 1.0 / (1.0 + (-(f + shift)).exp());
                f64::from(u8::from(rng.random::<f64>() < p))
            })
            .collect();
        if y.iter().all(|&v| v == y[0]) {
            continue;
        }
        leaves += 1;
        let total = |g: f64| y.iter().zip(&raw).map(|(&t, &f)| Loss::LogLoss.value(t, f + g)).sum::<f64>();
        let optimum = golden_section(total, -clamp, clamp);
        let step = leaf_step(Loss::LogLoss, &y, &raw);
        worst = worst.max((step - optimum).abs());
        assert!((step - optimum).abs() <= 5e-2, "leaf {leaves}: newton {step} vs optimum {optimum}");
    }
    eprintln!("largest Newton deviation: {worst:.2e}");
}

#[test]
fn pure_leaf_newton_step_closed_form() {
    assert_eq!(leaf_step(Loss::LogLoss, &[1.0; 4], &[0.0; 4]), 2.0);
    assert_eq!(leaf_step(Loss::LogLoss, &[0.0; 3], &[0.0; 3]), -2.0);
    assert_eq!(leaf_step(Loss::LogLoss, &[1.0; 3], &[-3.0; 3]), LEAF_STEP_CLAMP);
}

#[test]
fn squared_error_leaf_step_is_exact_minimizer() {
    let y = [1.0, 4.0, 2.5];
    let raw = [0.5, 1.0, 3.0];
    let step = leaf_step(Loss::SquaredError, &y, &raw);
    assert_eq!(step, 1.0);
}

#[test]
fn early_stop_is_sound() {
    // a step function is captured exactly: residuals vanish and the next tree is a stub
    let x: Vec<f64> = (0..40).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|&v| if v < 20.0 { 1.0 } else { 3.0 }).collect();
    let data = Dataset::new(vec!["x".into()], vec![Column::Numeric(x)], y, "y", Task::Regression).unwrap();
    let rows: Vec<usize> = (0..40).collect();
    for growth in [GrowthParams::train_gain(2), GrowthParams::cross_validated(2, 5)] {
        let params = BoostParams { n_trees: 50, learning_rate: 1.0, growth: growth.clone(), seed: 5, ..Default::default() };
        let mut last = Vec::new();
        let model = fit_with_callback(&data, &params, |_, raw| last = raw.to_vec()).unwrap();
        assert!(model.n_trees_fitted() < params.n_trees);
        let residuals = negative_gradient(Loss::SquaredError, data.target(), &last);
        let next = GrowthParams { seed: 5, tree_idx: model.n_trees_fitted() + 1, ..growth };
        assert!(grow_tree(&data, &residuals, &rows, &next).unwrap().is_stub());
    }
}

#[test]
fn staged_predictions_follow_the_additive_model() {
    let data = binary_data(3, 300);
    let params = BoostParams { n_trees: 25, loss: Loss::LogLoss, seed: 1, ..Default::default() };
    let model = fit(&data, &params).unwrap();
    let trees: Vec<Vec<f64>> = model.trees.iter().map(|t| t.predict(&data).unwrap()).collect();
    for stage in [0, 1, 10, model.n_trees_fitted()] {
        let staged = model.predict_raw_staged(&data, stage).unwrap();
        for (i, &s) in staged.iter().enumerate() {
            let manual = trees[..stage].iter().fold(model.f0, |acc, t| acc + model.learning_rate * t[i]);
            assert_eq!(s, manual);
        }
    }
    let proba = model.predict_proba(&data).unwrap();
    assert!(proba.iter().all(|&p| p > 0.0 && p < 1.0));
}

#[test]
fn persistence_round_trip_is_exact() {
    let data = regression_data(99, 1000);
    let params = BoostParams { n_trees: 100, learning_rate: 0.1, growth: GrowthParams::train_gain(3), seed: 2, ..Default::default() };
    let model = fit(&data, &params).unwrap();
    assert_eq!(model.n_trees_fitted(), 100);
    let text = model.to_json_string();
    let loaded = Ensemble::<f64>::from_json_str(&text).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(loaded.to_json_string(), text);
    let a = model.predict_raw(&data).unwrap();
    let b = loaded.predict_raw(&data).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    assert_eq!(Ensemble::<f64>::load(&path).unwrap(), model);
}

#[test]
fn classification_round_trip_and_metrics() {
    let data = binary_data(8, 400);
    let params = BoostParams { n_trees: 40, loss: Loss::LogLoss, growth: GrowthParams::cross_validated(3, 5), seed: 4, ..Default::default() };
    let model = fit(&data, &params).unwrap();
    let loaded = Ensemble::<f64>::from_json_str(&model.to_json_string()).unwrap();
    assert_eq!(loaded.predict_proba(&data).unwrap(), model.predict_proba(&data).unwrap());
    let base = Loss::LogLoss;
    let f0_only = data.target().iter().map(|&y| base.value(y, model.f0)).sum::<f64>() / 400.0;
    assert!(model.evaluate(&data, Metric::LogLoss).unwrap() < f0_only);
    assert!(model.evaluate(&data, Metric::Mse).is_err());
}

#[test]
fn stub_only_model_round_trips() {
    let data = Dataset::new(vec!["x".into()], vec![Column::Numeric(vec![1.0, 2.0, 3.0])], vec![2.0; 3], "y", Task::Regression).unwrap();
    let model = fit(&data, &BoostParams::default()).unwrap();
    assert_eq!(model.n_trees_fitted(), 0);
    let loaded = Ensemble::<f64>::from_json_str(&model.to_json_string()).unwrap();
    assert!(loaded.trees.is_empty());
    assert_eq!(loaded.predict_raw(&data).unwrap(), vec![2.0; 3]);
}
