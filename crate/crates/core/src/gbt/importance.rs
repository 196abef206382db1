use super::tree::{Ensemble, NodeKind};
use crate::error::{Error, Result};

/// What each split contributes to its feature's importance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ImportanceType {
    /// Sum of split gains.
    #[default]
    TotalGain,
    /// Number of splits.
    Weight,
}

impl std::str::FromStr for ImportanceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gain" | "total_gain" => Ok(ImportanceType::TotalGain),
            "weight" => Ok(ImportanceType::Weight),
            other => Err(Error::validation(format!(
                "unknown importance type `{other}`"
            ))),
        }
    }
}

/// Relative importance per feature, in percent, summing to 100. Features
/// never split on get 0. An ensemble without any split yields all zeros.
pub fn feature_importance(model: &Ensemble, kind: ImportanceType) -> Vec<f64> {
    let mut totals = vec![0.0; model.n_features()];
    for tree in &model.trees {
        for node in tree.nodes() {
            if let NodeKind::Split { feature, gain, .. } = node.kind {
                totals[feature] += match kind {
                    ImportanceType::TotalGain => gain,
                    ImportanceType::Weight => 1.0,
                };
            }
        }
    }
    let sum: f64 = totals.iter().sum();
    if sum <= 0.0 {
        log::warn!("ensemble has no splits; every feature importance is 0");
        return totals;
    }
    totals.iter().map(|t| 100.0 * t / sum).collect()
}

/// 1-based ranks by descending importance; ties keep feature order.
pub fn importance_ranks(importance: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]));
    let mut ranks = vec![0; importance.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::Tree;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn single_contributor() {
        let t = Tree::stump(3, 0.5, (1.0, 1.0), (2.0, 1.0), 7.25);
        let m = Ensemble::new(vec![t], 0.0, names(5)).unwrap();
        assert_eq!(
            feature_importance(&m, ImportanceType::TotalGain),
            vec![0.0, 0.0, 0.0, 100.0, 0.0]
        );
    }

    #[test]
    fn equal_gains_split_evenly() {
        let a = Tree::stump(0, 0.5, (1.0, 1.0), (2.0, 1.0), 3.0);
        let b = Tree::stump(1, 0.5, (1.0, 1.0), (2.0, 1.0), 3.0);
        let m = Ensemble::new(vec![a, b], 0.0, names(2)).unwrap();
        assert_eq!(
            feature_importance(&m, ImportanceType::TotalGain),
            vec![50.0, 50.0]
        );
    }

    #[test]
    fn weight_counts_splits() {
        let a = Tree::stump(0, 0.5, (1.0, 1.0), (2.0, 1.0), 9.0);
        let b = Tree::stump(1, 0.5, (1.0, 1.0), (2.0, 1.0), 1.0);
        let c = Tree::stump(1, 0.7, (1.0, 1.0), (2.0, 1.0), 1.0);
        let m = Ensemble::new(vec![a, b, c], 0.0, names(3)).unwrap();
        let w = feature_importance(&m, ImportanceType::Weight);
        assert!((w[0] - 100.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(w[2], 0.0);
        let g = feature_importance(&m, ImportanceType::TotalGain);
        assert!((g[0] - 100.0 * 9.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn all_leaf_is_zero() {
        let m = Ensemble::new(vec![Tree::constant(1.0, 4.0)], 0.0, names(2)).unwrap();
        assert_eq!(
            feature_importance(&m, ImportanceType::TotalGain),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn ranks() {
        assert_eq!(
            importance_ranks(&[10.0, 50.0, 10.0, 30.0]),
            vec![3, 1, 4, 2]
        );
    }
}
