//! Shapley values by direct subset enumeration. Exponential in the number
//! of features; used as the reference for [`super::tree_shap`].

use super::tree_shap::check_covers;
use super::ShapExplanation;
use crate::error::{Error, Result};
use crate::gbt::{Ensemble, NodeKind, Tree};

/// Largest feature count accepted (2^15 coalitions).
pub const MAX_BRUTE_FORCE_FEATURES: usize = 15;

/// Expected tree output given only the features in `known`: follow `x` at
/// known splits, average children by cover elsewhere.
fn conditional_expectation(tree: &Tree, node: usize, x: &[f64], known: u32) -> f64 {
    let n = tree.node(node);
    match n.kind {
        NodeKind::Leaf { value } => value,
        NodeKind::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            if known & (1 << feature) != 0 {
                let next = if x[feature] < threshold { left } else { right };
                conditional_expectation(tree, next, x, known)
            } else {
                let l = tree.node(left).cover * conditional_expectation(tree, left, x, known);
                let r = tree.node(right).cover * conditional_expectation(tree, right, x, known);
                (l + r) / n.cover
            }
        }
    }
}

/// Coalition value `v(S)` for the feature subset encoded in `mask`.
pub fn coalition_value(model: &Ensemble, x: &[f64], mask: u32) -> f64 {
    model
        .trees
        .iter()
        .map(|t| conditional_expectation(t, 0, x, mask))
        .sum::<f64>()
        + model.base_score
}

/// Shapley values from the definition
/// `φ_i = Σ_{S ⊆ F∖{i}} |S|!(|F|−|S|−1)!/|F|! · [v(S ∪ {i}) − v(S)]`.
pub fn brute_force_shap(model: &Ensemble, x: &[f64]) -> Result<ShapExplanation> {
    let m = model.n_features();
    if x.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: x.len(),
        });
    }
    if m > MAX_BRUTE_FORCE_FEATURES {
        return Err(Error::validation(format!(
            "brute-force attribution supports at most {MAX_BRUTE_FORCE_FEATURES} features, model has {m}"
        )));
    }
    check_covers(model)?;

    let values: Vec<f64> = (0..1u32 << m)
        .map(|mask| coalition_value(model, x, mask))
        .collect();
    let factorial = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let weights: Vec<f64> = (0..m)
        .map(|s| factorial(s) * factorial(m - s - 1) / factorial(m))
        .collect();

    let mut contributions = vec![0.0; m];
    for (i, phi) in contributions.iter_mut().enumerate() {
        let bit = 1u32 << i;
        for mask in 0..1u32 << m {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                *phi += weights[s] * (values[(mask | bit) as usize] - values[mask as usize]);
            }
        }
    }
    Ok(ShapExplanation {
        base_value: values[0],
        contributions,
        prediction: values[(1usize << m) - 1],
    })
}
