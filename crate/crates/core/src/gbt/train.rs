//! Exact greedy second-order boosting on squared error.
//!
//! Each round fits one tree to gradients `g = margin - target` with unit
//! hessians. Split candidates are midpoints between adjacent distinct
//! values of a feature; the best candidate maximizes
//!
//! ```text
//! gain = ½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ
//! ```
//!
//! and is kept only if the gain is positive and both children carry a
//! hessian sum of at least `min_child_weight`. Leaves output `−η·G/(H+λ)`.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::TrainConfig;
use super::tree::{Ensemble, Node, NodeKind, Tree};
use crate::error::{Error, Result};
use crate::matrix::{Dataset, DenseMatrix};
use crate::tuning::metrics::rmsle;

/// Stream reserved for the early-stopping holdout draw; rounds use streams 0..num_rounds.
const HOLDOUT_STREAM: u64 = u64::MAX;

/// Generator for one sampling stream. Each (seed, stream) pair yields an
/// independent, reproducible sequence.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn validate_inputs(x: &DenseMatrix, y: &[f64], config: &TrainConfig) -> Result<()> {
    if x.is_empty() || x.n_cols() == 0 {
        return Err(Error::validation("training matrix is empty"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::validation(format!(
            "{} training rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if let Some((r, c)) = x.first_non_finite() {
        return Err(Error::validation(format!(
            "missing or non-finite value at row {r}, column {c}"
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!(
            "missing or non-finite target at row {i}"
        )));
    }
    config.validate(x.n_cols())
}

/// Trains on a labelled dataset, keeping its feature names.
pub fn fit(data: &Dataset, config: &TrainConfig) -> Result<Ensemble> {
    let mut model = train(&data.features, &data.target, config)?;
    model.feature_names = data.feature_names.clone();
    Ok(model)
}

/// Trains an ensemble. Features are named `f0, f1, ...`.
///
/// Without early stopping the result has exactly `num_rounds` trees. With
/// early stopping, a seeded `holdout_fraction` of the rows is set aside,
/// RMSLE on it is tracked after every round, and the ensemble is cut back
/// to the best round once `patience` rounds pass without improvement.
pub fn train(x: &DenseMatrix, y: &[f64], config: &TrainConfig) -> Result<Ensemble> {
    validate_inputs(x, y, config)?;
    let transform = config.target_transform;

    let (fit_rows, holdout_rows) = match config.early_stopping {
        Some(es) => {
            if y.iter().any(|&v| v < 0.0) {
                return Err(Error::validation(
                    "early stopping monitors RMSLE and needs non-negative targets",
                ));
            }
            let n_hold = (es.holdout_fraction * x.n_rows() as f64).floor() as usize;
            if n_hold == 0 || n_hold == x.n_rows() {
                return Err(Error::validation(format!(
                    "early stopping holdout of {} rows leaves nothing to fit or monitor",
                    n_hold
                )));
            }
            let mut rng = stream_rng(config.seed, HOLDOUT_STREAM);
            let mut hold = index::sample(&mut rng, x.n_rows(), n_hold).into_vec();
            hold.sort_unstable();
            let mut is_hold = vec![false; x.n_rows()];
            hold.iter().for_each(|&i| is_hold[i] = true);
            let fit: Vec<usize> = (0..x.n_rows()).filter(|&i| !is_hold[i]).collect();
            (fit, hold)
        }
        None => ((0..x.n_rows()).collect(), Vec::new()),
    };

    let fit_x = x.select_rows(&fit_rows);
    let targets: Vec<f64> = fit_rows.iter().map(|&i| transform.forward(y[i])).collect();
    let base_score = config
        .base_score
        .unwrap_or_else(|| targets.iter().sum::<f64>() / targets.len() as f64);

    let sorted = presort(&fit_x);
    let mut margins = vec![base_score; fit_x.n_rows()];
    let hold_x = x.select_rows(&holdout_rows);
    let hold_y: Vec<f64> = holdout_rows.iter().map(|&i| y[i]).collect();
    let mut hold_margins = vec![base_score; holdout_rows.len()];

    let mut trees = Vec::with_capacity(config.num_rounds);
    let mut best: Option<(usize, f64)> = None;
    for round in 0..config.num_rounds {
        let grad: Vec<f64> = margins.iter().zip(&targets).map(|(m, t)| m - t).collect();
        let tree = grow_tree(&fit_x, &sorted, &grad, config, round as u64);
        for (m, row) in margins.iter_mut().zip(fit_x.rows()) {
            *m += tree.predict_row(row);
        }
        trees.push(tree);

        if let Some(es) = config.early_stopping {
            let last = trees.last().expect("just pushed");
            for (m, row) in hold_margins.iter_mut().zip(hold_x.rows()) {
                *m += last.predict_row(row);
            }
            let preds: Vec<f64> = hold_margins.iter().map(|&m| transform.inverse(m)).collect();
            let score = rmsle(&hold_y, &preds)?;
            match best {
                Some((_, s)) if score >= s => {}
                _ => best = Some((round, score)),
            }
            let (best_round, _) = best.expect("set above");
            if round - best_round >= es.patience {
                log::debug!("early stop at round {round}, best round {best_round}");
                break;
            }
        }
    }
    if let Some((best_round, _)) = best {
        trees.truncate(best_round + 1);
    }

    Ok(Ensemble {
        trees,
        base_score,
        feature_names: (0..x.n_cols()).map(|j| format!("f{j}")).collect(),
        target_transform: transform,
        config: Some(config.clone()),
    })
}

/// Row indices sorted by each feature's value (ties by row index).
fn presort(x: &DenseMatrix) -> Vec<Vec<u32>> {
    (0..x.n_cols())
        .into_par_iter()
        .map(|j| {
            let mut idx: Vec<u32> = (0..x.n_rows() as u32).collect();
            idx.sort_by(|&a, &b| {
                x.get(a as usize, j)
                    .total_cmp(&x.get(b as usize, j))
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

fn sample_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 1e-9).floor() as usize).clamp(1, n)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    threshold: f64,
}

struct Grower<'a> {
    x: &'a DenseMatrix,
    grad: &'a [f64],
    config: &'a TrainConfig,
    /// Feature indices used by this tree, ascending.
    features: Vec<usize>,
    nodes: Vec<Node>,
    go_left: Vec<bool>,
}

fn grow_tree(
    x: &DenseMatrix,
    sorted: &[Vec<u32>],
    grad: &[f64],
    config: &TrainConfig,
    round: u64,
) -> Tree {
    let mut rng = stream_rng(config.seed, round);
    let n = x.n_rows();
    let rows_in: Option<Vec<bool>> = (config.subsample < 1.0).then(|| {
        let mut mask = vec![false; n];
        for i in index::sample(&mut rng, n, sample_count(config.subsample, n)) {
            mask[i] = true;
        }
        mask
    });
    let n_cols = x.n_cols();
    let k = config.columns_per_tree(n_cols);
    let mut features: Vec<usize> = if k < n_cols {
        index::sample(&mut rng, n_cols, k).into_vec()
    } else {
        (0..n_cols).collect()
    };
    features.sort_unstable();

    let node_sorted: Vec<Vec<u32>> = features
        .iter()
        .map(|&j| match &rows_in {
            Some(mask) => sorted[j]
                .iter()
                .copied()
                .filter(|&r| mask[r as usize])
                .collect(),
            None => sorted[j].clone(),
        })
        .collect();

    let mut grower = Grower {
        x,
        grad,
        config,
        features,
        nodes: Vec::new(),
        go_left: vec![false; n],
    };
    grower.build(node_sorted, 0);
    Tree::from_nodes_unchecked(grower.nodes)
}

impl Grower<'_> {
    fn best_split_for(
        &self,
        slot: usize,
        rows: &[u32],
        g_sum: f64,
        h_sum: f64,
    ) -> Option<Candidate> {
        let cfg = self.config;
        let feature = self.features[slot];
        let parent = g_sum * g_sum / (h_sum + cfg.lambda);
        let mut best: Option<Candidate> = None;
        let (mut gl, mut hl) = (0.0, 0.0);
        for w in rows.windows(2) {
            let (r, next) = (w[0] as usize, w[1] as usize);
            gl += self.grad[r];
            hl += 1.0;
            let v = self.x.get(r, feature);
            let v_next = self.x.get(next, feature);
            if v_next <= v {
                continue;
            }
            let (gr, hr) = (g_sum - gl, h_sum - hl);
            if hl < cfg.min_child_weight || hr < cfg.min_child_weight {
                continue;
            }
            let gain = 0.5 * (gl * gl / (hl + cfg.lambda) + gr * gr / (hr + cfg.lambda) - parent)
                - cfg.gamma;
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                let mut threshold = v + (v_next - v) / 2.0;
                if threshold <= v {
                    // adjacent floats: the midpoint rounds onto the lower value
                    threshold = v_next;
                }
                best = Some(Candidate { gain, threshold });
            }
        }
        best
    }

    /// Builds the subtree over the rows in `sorted` (one ordering per used
    /// feature) and returns its node index.
    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let g_sum: f64 = rows.iter().map(|&r| self.grad[r as usize]).sum();
        let h_sum = rows.len() as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::leaf(0.0, h_sum));

        let split = if depth < self.config.max_depth && rows.len() > 1 {
            let candidates: Vec<Option<Candidate>> = (0..self.features.len())
                .into_par_iter()
                .map(|slot| self.best_split_for(slot, &sorted[slot], g_sum, h_sum))
                .collect();
            // strict improvement keeps the lowest feature index, then lowest threshold
            candidates
                .into_iter()
                .enumerate()
                .filter_map(|(slot, c)| c.map(|c| (slot, c)))
                .fold(None::<(usize, Candidate)>, |acc, (slot, c)| match acc {
                    Some((_, b)) if c.gain <= b.gain => acc,
                    _ => Some((slot, c)),
                })
        } else {
            None
        };

        match split {
            Some((slot, cand)) => {
                let feature = self.features[slot];
                for &r in &sorted[0] {
                    self.go_left[r as usize] = self.x.get(r as usize, feature) < cand.threshold;
                }
                let (left_sorted, right_sorted): (Vec<Vec<u32>>, Vec<Vec<u32>>) = sorted
                    .iter()
                    .map(|list| list.iter().partition(|&&r| self.go_left[r as usize]))
                    .unzip();
                drop(sorted);
                let left = self.build(left_sorted, depth + 1);
                let right = self.build(right_sorted, depth + 1);
                self.nodes[id].kind = NodeKind::Split {
                    feature,
                    threshold: cand.threshold,
                    left,
                    right,
                    gain: cand.gain,
                };
            }
            None => {
                let value = -self.config.eta * g_sum / (h_sum + self.config.lambda);
                // normalize -0.0
                self.nodes[id].kind = NodeKind::Leaf { value: value + 0.0 };
            }
        }
        id
    }
}
