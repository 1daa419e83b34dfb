//! Structural properties of grown trees.

use cvboost::seed::rng_for;
use cvboost::tree::{grow_tree, node_sse, Node};
use cvboost::{Column, Dataset, GrowthParams, Rational, Scalar, Task, Tree};
use proptest::prelude::*;
use rand::Rng;

fn random_dataset(seed: u64, n: usize, k: u32) -> Dataset<f64> {
    let mut rng = rng_for(&[0x7EE, seed]);
    let x: Vec<f64> = (0..n).map(|_| (rng.random_range(0..25) as f64) / 4.0).collect();
    let c: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let y: Vec<f64> =
        x.iter().zip(&c).map(|(&v, &c)| (v * 0.7).sin() + 0.3 * (c % 3) as f64 + rng.random::<f64>()).collect();
    Dataset::new(
        vec!["x".into(), "c".into()],
        vec![Column::Numeric(x), Column::Categorical { codes: c, labels: (0..k).map(|i| format!("L{i}")).collect() }],
        y,
        "y",
        Task::Regression,
    )
    .unwrap()
}

fn sum_internal_gains<F: Scalar>(tree: &Tree<F>) -> F {
    tree.internal_nodes()
        .iter()
        .map(|n| match n {
            Node::Internal { gain, .. } => *gain,
            Node::Leaf { .. } => unreachable!(),
        })
        .fold(F::zero(), |a, b| a + b)
}

/// Training rows grouped by the leaf (node id) they reach.
fn rows_per_leaf<F: Scalar>(tree: &Tree<F>, data: &Dataset<F>) -> Vec<(usize, Vec<usize>)> {
    let mut groups: Vec<(usize, Vec<usize>)> = tree.leaves().iter().map(|l| (l.node_id(), Vec::new())).collect();
    for i in 0..data.n_rows() {
        let id = tree.leaf_for(data, i).node_id();
        groups.iter_mut().find(|g| g.0 == id).unwrap().1.push(i);
    }
    groups
}

fn leaf_sse_total<F: Scalar>(tree: &Tree<F>, data: &Dataset<F>) -> F {
    rows_per_leaf(tree, data)
        .iter()
        .map(|(_, rows)| node_sse(&rows.iter().map(|&i| data.target()[i]).collect::<Vec<_>>()).unwrap())
        .fold(F::zero(), |a, b| a + b)
}

#[test]
fn gain_identity_on_fifty_trees() {
    for seed in 0..50 {
        let data = random_dataset(seed, 60 + seed as usize * 3, 2 + (seed % 7) as u32);
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let params = GrowthParams::train_gain(1 + (seed % 5) as usize);
        let tree = grow_tree(&data, data.target(), &rows, &params).unwrap();
        let lhs = node_sse(data.target()).unwrap() - leaf_sse_total(&tree, &data);
        let rhs = sum_internal_gains(&tree);
        assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1.0), "seed {seed}: {lhs} vs {rhs}");
    }
}

#[test]
fn gain_identity_is_exact_in_rationals() {
    let mut rng = rng_for(&[0xE8AC7]);
    for _ in 0..20 {
        let n = rng.random_range(8..30);
        let x: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.random_range(0..6))).collect();
        let c: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let y: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.random_range(-4..5))).collect();
        let data = Dataset::new(
            vec!["x".into(), "c".into()],
            vec![Column::Numeric(x), Column::Categorical { codes: c, labels: (0..4).map(|i| i.to_string()).collect() }],
            y,
            "y",
            Task::Regression,
        )
        .unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let tree = grow_tree(&data, data.target(), &rows, &GrowthParams::train_gain(3)).unwrap();
        assert_eq!(node_sse(data.target()).unwrap() - leaf_sse_total(&tree, &data), sum_internal_gains(&tree));
    }
}

#[test]
fn depth_one_tree_has_single_split() {
    let x: Vec<f64> = (0..10).map(f64::from).collect();
    let y: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
    let data = Dataset::new(vec!["x".into()], vec![Column::Numeric(x)], y, "y", Task::Regression).unwrap();
    let rows: Vec<usize> = (0..10).collect();
    let tree = grow_tree(&data, data.target(), &rows, &GrowthParams::train_gain(1)).unwrap();
    assert_eq!(tree.internal_nodes().len(), 1);
    assert_eq!(tree.leaves().len(), 2);
}

fn check_structure(tree: &Tree<f64>, data: &Dataset<f64>, params: &GrowthParams) -> Result<(), TestCaseError> {
    prop_assert!(tree.depth() <= params.max_depth);
    for node in tree.internal_nodes() {
        if let Node::Internal { gain, cover, left, right, .. } = node {
            prop_assert!(*gain >= 0.0);
            prop_assert_eq!(*cover, left.cover() + right.cover());
        }
    }
    let groups = rows_per_leaf(tree, data);
    prop_assert_eq!(groups.iter().map(|g| g.1.len()).sum::<usize>(), data.n_rows());
    for (leaf, (id, rows)) in tree.leaves().iter().zip(&groups) {
        let Node::Leaf { value, count, node_id } = leaf else { unreachable!() };
        prop_assert_eq!(node_id, id);
        prop_assert_eq!(*count, rows.len());
        prop_assert!(*count >= params.min_samples_leaf);
        let mean = rows.iter().map(|&i| data.target()[i]).sum::<f64>() / rows.len() as f64;
        prop_assert!((mean - value).abs() <= 1e-9 * mean.abs().max(1.0));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn train_gain_trees_are_well_formed(seed in any::<u64>(), depth in 1usize..5, min_leaf in 1usize..6, k in 2u32..12) {
        let data = random_dataset(seed, 100, k);
        let rows: Vec<usize> = (0..100).collect();
        let params = GrowthParams { min_samples_leaf: min_leaf, ..GrowthParams::train_gain(depth) };
        let tree = grow_tree(&data, data.target(), &rows, &params).unwrap();
        check_structure(&tree, &data, &params)?;
    }

    #[test]
    fn cross_validated_trees_are_well_formed(seed in any::<u64>(), depth in 1usize..5, folds in 2usize..6) {
        let data = random_dataset(seed, 100, 8);
        let rows: Vec<usize> = (0..100).collect();
        let params = GrowthParams { seed, ..GrowthParams::cross_validated(depth, folds) };
        let tree = grow_tree(&data, data.target(), &rows, &params).unwrap();
        check_structure(&tree, &data, &params)?;
        let again = grow_tree(&data, data.target(), &rows, &params).unwrap();
        prop_assert_eq!(tree, again);
    }
}

#[test]
fn unseen_code_follows_heavier_child() {
    // category 0 (7 rows) vs category 1 (3 rows): the heavier side is left
    let codes: Vec<u32> = (0..10).map(|i| u32::from(i >= 7)).collect();
    let y: Vec<f64> = codes.iter().map(|&c| if c == 0 { 1.0 } else { 5.0 }).collect();
    let data = Dataset::new(
        vec!["c".into()],
        vec![Column::Categorical { codes, labels: vec!["a".into(), "b".into()] }],
        y,
        "y",
        Task::Regression,
    )
    .unwrap();
    let rows: Vec<usize> = (0..10).collect();
    let tree = grow_tree(&data, data.target(), &rows, &GrowthParams::train_gain(1)).unwrap();
    let unseen = Dataset::new(
        vec!["c".into()],
        vec![Column::Categorical { codes: vec![2], labels: vec!["a".into(), "b".into()] }],
        vec![0.0],
        "y",
        Task::Regression,
    )
    .unwrap();
    assert_eq!(tree.predict(&unseen).unwrap(), vec![1.0]);
}
