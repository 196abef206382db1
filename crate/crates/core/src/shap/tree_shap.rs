//! Polynomial-time exact Shapley values for tree ensembles under the
//! path-dependent (cover-conditional) value function.
//!
//! The recursion walks every root-to-leaf path once, carrying the set of
//! distinct features met so far together with, for each, the fraction of
//! cover that flows along the path when the feature is unknown (`zero`)
//! and whether `x` itself follows the path (`one`). The path weights hold
//! the Shapley permutation weights of all subset sizes, so a leaf can
//! credit each path feature in O(depth).

use rayon::prelude::*;

use super::ShapExplanation;
use crate::error::{Error, Result};
use crate::gbt::{Ensemble, NodeKind, Tree};
use crate::matrix::DenseMatrix;

const NO_FEATURE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

/// Appends a feature to the path and updates the subset-size weights.
fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: usize) {
    let depth = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    });
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one_fraction * path[i].weight * (i + 1) as f64 / d1;
        path[i].weight = zero_fraction * path[i].weight * (depth - i) as f64 / d1;
    }
}

/// Inverse of [`extend`] for the element at `index`.
fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one_portion = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one_portion * d1 / ((i + 1) as f64 * one);
            next_one_portion = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

/// Total path weight with the element at `index` unwound, without modifying the path.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one_portion = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one_portion * d1 / ((i + 1) as f64 * one);
            total += tmp;
            next_one_portion = path[i].weight - tmp * zero * (depth - i) as f64 / d1;
        } else {
            total += path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    node: usize,
    x: &[f64],
    phi: &mut [f64],
    mut path: Vec<PathElement>,
    zero_fraction: f64,
    one_fraction: f64,
    feature: usize,
) {
    extend(&mut path, zero_fraction, one_fraction, feature);
    let n = tree.node(node);
    match n.kind {
        NodeKind::Leaf { value } => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let el = path[i];
                phi[el.feature] += w * (el.one_fraction - el.zero_fraction) * value;
            }
        }
        NodeKind::Split {
            feature: split,
            threshold,
            left,
            right,
            ..
        } => {
            let (hot, cold) = if x[split] < threshold {
                (left, right)
            } else {
                (right, left)
            };
            let hot_zero = tree.node(hot).cover / n.cover;
            let cold_zero = tree.node(cold).cover / n.cover;
            let (mut incoming_zero, mut incoming_one) = (1.0, 1.0);
            // a feature already on the path is merged, not duplicated
            if let Some(k) = path.iter().position(|e| e.feature == split) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind(&mut path, k);
            }
            recurse(
                tree,
                hot,
                x,
                phi,
                path.clone(),
                hot_zero * incoming_zero,
                incoming_one,
                split,
            );
            recurse(
                tree,
                cold,
                x,
                phi,
                path,
                cold_zero * incoming_zero,
                0.0,
                split,
            );
        }
    }
}

/// Fails on any node whose cover is not strictly positive.
pub(crate) fn check_covers(model: &Ensemble) -> Result<()> {
    for (t, tree) in model.trees.iter().enumerate() {
        if let Some(i) = tree
            .nodes()
            .iter()
            .position(|n| !(n.cover > 0.0 && n.cover.is_finite()))
        {
            return Err(Error::Integrity(format!(
                "tree {t} node {i} has cover {}; attribution needs positive covers",
                tree.node(i).cover
            )));
        }
    }
    Ok(())
}

/// Adds one tree's attributions for `x` into `phi`.
pub fn tree_contributions(tree: &Tree, x: &[f64], phi: &mut [f64]) {
    recurse(
        tree,
        0,
        x,
        phi,
        Vec::with_capacity(16),
        1.0,
        1.0,
        NO_FEATURE,
    );
}

/// Exact Shapley attribution of the model margin at `x`.
///
/// `base_value` is the empty-coalition value (the cover-weighted expected
/// margin), and `base_value + Σ contributions = prediction` up to rounding.
pub fn tree_shap(model: &Ensemble, x: &[f64]) -> Result<ShapExplanation> {
    if x.len() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.len(),
        });
    }
    check_covers(model)?;
    Ok(explain_unchecked(model, x))
}

fn explain_unchecked(model: &Ensemble, x: &[f64]) -> ShapExplanation {
    let mut contributions = vec![0.0; model.n_features()];
    for tree in &model.trees {
        tree_contributions(tree, x, &mut contributions);
    }
    ShapExplanation {
        base_value: model.expected_margin(),
        contributions,
        prediction: model.margin_row(x),
    }
}

/// Explains every row of `x`, in parallel; output follows row order.
pub fn explain_rows(model: &Ensemble, x: &DenseMatrix) -> Result<Vec<ShapExplanation>> {
    if x.n_cols() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.n_cols(),
        });
    }
    check_covers(model)?;
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| explain_unchecked(model, x.row(i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::Node;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn constant_model() {
        let m = Ensemble::new(vec![Tree::constant(4.0, 10.0)], 1.5, names(3)).unwrap();
        let e = tree_shap(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.contributions, vec![0.0; 3]);
        assert_eq!(e.base_value, 5.5);
        assert_eq!(e.prediction, 5.5);
    }

    #[test]
    fn stump_closed_form() {
        let (a, ca, b, cb) = (3.0, 2.0, -1.0, 6.0);
        let m = Ensemble::new(
            vec![Tree::stump(0, 0.5, (a, ca), (b, cb), 1.0)],
            0.0,
            names(2),
        )
        .unwrap();
        let e = tree_shap(&m, &[0.0, 9.0]).unwrap();
        let expected = a - (ca * a + cb * b) / (ca + cb);
        assert!((e.contributions[0] - expected).abs() < 1e-15);
        assert_eq!(e.contributions[1], 0.0);
    }

    #[test]
    fn repeated_feature_on_path() {
        // x0 split twice along one path
        let nodes = vec![
            Node::split(0, 0.5, 1, 2, 1.0, 10.0),
            Node::split(0, 0.25, 3, 4, 1.0, 4.0),
            Node::leaf(5.0, 6.0),
            Node::leaf(-2.0, 1.0),
            Node::leaf(1.0, 3.0),
        ];
        let m = Ensemble::new(vec![Tree::new(nodes).unwrap()], 0.0, names(1)).unwrap();
        for x in [0.1, 0.3, 0.9] {
            let e = tree_shap(&m, &[x]).unwrap();
            // single player: φ = f(x) − E[f]
            assert!((e.contributions[0] - (e.prediction - e.base_value)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cover_is_integrity_error() {
        let t = Tree::stump(0, 0.5, (1.0, 0.0), (2.0, 3.0), 1.0);
        let m = Ensemble::new(vec![t], 0.0, names(1)).unwrap();
        assert!(matches!(tree_shap(&m, &[0.0]), Err(Error::Integrity(_))));
    }

    #[test]
    fn dimension_checked() {
        let m = Ensemble::new(vec![], 0.0, names(2)).unwrap();
        assert!(matches!(
            tree_shap(&m, &[0.0]),
            Err(Error::Dimension { .. })
        ));
    }
}
