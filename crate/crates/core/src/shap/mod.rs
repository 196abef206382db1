//! Exact Shapley additive explanations for boosted tree ensembles.
//!
//! Attributions use the path-dependent value function: the value of a
//! feature subset is the model's expected margin when only those features
//! are known, with unknown splits averaged by training cover. Explanations
//! are on the margin scale, which equals the prediction scale unless the
//! model was trained with a log1p target.

mod brute;
mod dependence;
mod force;
mod summary;
mod tree_shap;

pub use brute::{brute_force_shap, coalition_value, MAX_BRUTE_FORCE_FEATURES};
pub use dependence::{dependence, write_dependence_csv, DependenceView, MIN_DEPENDENCE_SAMPLES};
pub use force::{force_record, write_force_json, ForceEntry, ForceRecord};
pub use summary::{
    summarize, write_importance_csv, write_summary_csv, FeatureSummary, SummaryView,
};
pub use tree_shap::{explain_rows, tree_contributions, tree_shap};

/// Additive attribution of one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapExplanation {
    /// Expected margin over the training distribution.
    pub base_value: f64,
    pub contributions: Vec<f64>,
    pub prediction: f64,
}

impl ShapExplanation {
    /// `base_value + Σ contributions − prediction`.
    pub fn local_accuracy_gap(&self) -> f64 {
        self.base_value + self.contributions.iter().sum::<f64>() - self.prediction
    }
}

/// Pearson correlation; `None` if either input has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
