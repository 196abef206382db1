mod common;

use demand_core::gbt::TrainConfig;
use demand_core::tuning::{grid_search, r_squared, rmsle, GridSpec, TuneOptions};
use demand_core::Dataset;
use demand_core::DenseMatrix;
use proptest::prelude::*;
use rand::Rng;

fn naive_r2(y: &[f64], p: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..y.len() {
        ss_res += (y[i] - p[i]) * (y[i] - p[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    1.0 - ss_res / ss_tot
}

fn naive_rmsle(y: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        let d = (p[i] + 1.0).ln() - (y[i] + 1.0).ln();
        s += d * d;
    }
    (s / y.len() as f64).sqrt()
}

proptest! {
    #[test]
    fn metrics_match_naive(
        pairs in prop::collection::vec((0.0f64..5000.0, 0.0f64..5000.0), 2..200)
    ) {
        let (y, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!((rmsle(&y, &p).unwrap() - naive_rmsle(&y, &p)).abs() < 1e-12);
        prop_assert_eq!(rmsle(&y, &y).unwrap(), 0.0);
        if y.iter().any(|v| *v != y[0]) {
            prop_assert!((r_squared(&y, &p).unwrap() - naive_r2(&y, &p)).abs() < 1e-12);
            prop_assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        }
    }
}

/// Depth-2 interaction plus noise: depth-1 trees cannot express it.
fn interaction_data(n: usize) -> Dataset {
    let mut rng = common::rng(21);
    let rows = common::random_rows(&mut rng, n, 3);
    let target = rows
        .iter()
        .map(|r| {
            let signal = if (r[0] < 0.5) == (r[1] < 0.5) {
                100.0
            } else {
                10.0
            };
            signal + rng.gen_range(0.0..2.0)
        })
        .collect();
    Dataset::new(
        "y",
        common::names(3),
        DenseMatrix::from_rows(&rows).unwrap(),
        target,
    )
    .unwrap()
}

fn small_grid(depths: Vec<usize>) -> GridSpec {
    GridSpec {
        max_depth: depths,
        min_child_weight: vec![1.0],
        eta: vec![0.3],
        subsample: vec![1.0],
        colsample_bytree: vec![1.0],
    }
}

fn options(seed: u64) -> TuneOptions {
    TuneOptions {
        folds: 5,
        seed,
        base: TrainConfig {
            num_rounds: 40,
            early_stopping: None,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn deeper_trees_win_on_interaction() {
    let data = interaction_data(300);
    let report = grid_search(&data, &small_grid(vec![1, 2, 6]), &options(4)).unwrap();
    let winner = report.winning();
    assert_ne!(winner.point.max_depth, 1);
    let depth1 = &report.records[0];
    assert!(winner.mean_rmsle < depth1.mean_rmsle);
    assert_eq!(report.records.iter().filter(|r| r.winner).count(), 1);
    assert_eq!(winner.rank, 1);
}

#[test]
fn report_is_reproducible() {
    let data = interaction_data(120);
    let grid = small_grid(vec![1, 3]);
    let a = grid_search(&data, &grid, &options(9)).unwrap();
    let b = grid_search(&data, &grid, &options(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_train + a.n_test, 120);
    assert_eq!(a.n_train, 96);
    assert!(a.records.iter().all(|r| r.fold_rmsle.len() == 5));
}

#[test]
fn singleton_grid() {
    let data = interaction_data(60);
    let report = grid_search(&data, &small_grid(vec![2]), &options(1)).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.records[0].winner);
    assert_eq!(report.winner, 0);
}
