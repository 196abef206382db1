use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

use super::config::{TargetTransform, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Loss reduction achieved by the split.
        gain: f64,
    },
    /// Leaf output, learning rate already applied.
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    /// Hessian sum of the training rows that reached this node.
    pub cover: f64,
}

impl Node {
    pub fn leaf(value: f64, cover: f64) -> Self {
        Self {
            kind: NodeKind::Leaf { value },
            cover,
        }
    }

    pub fn split(
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
        cover: f64,
    ) -> Self {
        Self {
            kind: NodeKind::Split {
                feature,
                threshold,
                left,
                right,
                gain,
            },
            cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// A regression tree stored as a node arena with the root at index 0.
/// Children always have larger indices than their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Builds a tree after checking its structure: every non-root node has
    /// exactly one parent, children follow their parent, covers are positive
    /// and add up at each split.
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let tree = Self { nodes };
        tree.check_structure()
            .map_err(|(node, msg)| Error::Integrity(format!("node {node}: {msg}")))?;
        Ok(tree)
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    /// Single-leaf tree.
    pub fn constant(value: f64, cover: f64) -> Self {
        Self {
            nodes: vec![Node::leaf(value, cover)],
        }
    }

    /// Depth-one tree on `feature`.
    pub fn stump(
        feature: usize,
        threshold: f64,
        (left_value, left_cover): (f64, f64),
        (right_value, right_cover): (f64, f64),
        gain: f64,
    ) -> Self {
        Self {
            nodes: vec![
                Node::split(feature, threshold, 1, 2, gain, left_cover + right_cover),
                Node::leaf(left_value, left_cover),
                Node::leaf(right_value, right_cover),
            ],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    /// Index of the leaf `x` lands in.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i].kind {
                NodeKind::Leaf { .. } => return i,
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)].kind {
            NodeKind::Leaf { value } => value,
            NodeKind::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    /// Cover-weighted mean leaf value.
    pub fn expected_value(&self) -> f64 {
        let root_cover = self.nodes[0].cover;
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { value } => Some(value * n.cover / root_cover),
                NodeKind::Split { .. } => None,
            })
            .sum()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Split { feature, .. } => Some(feature),
                NodeKind::Leaf { .. } => None,
            })
            .max()
    }

    /// Structural check; reports the offending node index.
    pub(crate) fn check_structure(&self) -> std::result::Result<(), (usize, String)> {
        if self.nodes.is_empty() {
            return Err((0, "tree has no nodes".into()));
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !(node.cover.is_finite() && node.cover > 0.0) {
                return Err((i, format!("cover {} is not positive", node.cover)));
            }
            match node.kind {
                NodeKind::Leaf { value } => {
                    if !value.is_finite() {
                        return Err((i, "leaf value is not finite".into()));
                    }
                }
                NodeKind::Split {
                    threshold,
                    left,
                    right,
                    gain,
                    ..
                } => {
                    if !threshold.is_finite() || !gain.is_finite() {
                        return Err((i, "threshold and gain must be finite".into()));
                    }
                    for child in [left, right] {
                        if child <= i || child >= self.nodes.len() {
                            return Err((i, format!("child index {child} invalid")));
                        }
                        parents[child] += 1;
                    }
                    if left == right {
                        return Err((i, "left and right child coincide".into()));
                    }
                    let sum = self.nodes[left].cover + self.nodes[right].cover;
                    if (node.cover - sum).abs() > 1e-9 * node.cover.max(1.0) {
                        return Err((
                            i,
                            format!("cover {} differs from children's sum {sum}", node.cover),
                        ));
                    }
                }
            }
        }
        if let Some(orphan) = (1..self.nodes.len()).find(|&i| parents[i] != 1) {
            return Err((orphan, format!("node has {} parents", parents[orphan])));
        }
        Ok(())
    }
}

/// Boosted ensemble. On the fitted (margin) scale,
/// `margin(x) = base_score + sum of tree outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub trees: Vec<Tree>,
    pub base_score: f64,
    pub feature_names: Vec<String>,
    pub target_transform: TargetTransform,
    /// Configuration the model was trained with, when known.
    pub config: Option<TrainConfig>,
}

impl Ensemble {
    pub fn new(trees: Vec<Tree>, base_score: f64, feature_names: Vec<String>) -> Result<Self> {
        let model = Self {
            trees,
            base_score,
            feature_names,
            target_transform: TargetTransform::Identity,
            config: None,
        };
        model.check_features()?;
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub(crate) fn check_features(&self) -> Result<()> {
        for (t, tree) in self.trees.iter().enumerate() {
            if let Some(f) = tree.max_feature_index() {
                if f >= self.n_features() {
                    return Err(Error::Integrity(format!(
                        "tree {t} splits on feature {f}, model has {}",
                        self.n_features()
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got,
            });
        }
        Ok(())
    }

    /// Raw additive output for one row, before the inverse target transform.
    pub fn margin_row(&self, x: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.predict_row(x))
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x.len())?;
        Ok(self.target_transform.inverse(self.margin_row(x)))
    }

    pub fn predict_margin(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        self.check_width(x.n_cols())?;
        Ok(x.rows().map(|r| self.margin_row(r)).collect())
    }

    /// Predictions on the original target scale.
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let t = self.target_transform;
        Ok(self
            .predict_margin(x)?
            .into_iter()
            .map(|m| t.inverse(m))
            .collect())
    }

    /// Margin expected under the training distribution: base score plus
    /// each tree's cover-weighted mean leaf.
    pub fn expected_margin(&self) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.expected_value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ensemble_predicts_base() {
        let m = Ensemble::new(vec![], 3.5, vec!["a".into(), "b".into()]).unwrap();
        let x = DenseMatrix::from_rows(&[[0.0, 1.0], [5.0, -2.0]]).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![3.5, 3.5]);
    }

    #[test]
    fn single_leaf_adds_value() {
        let m = Ensemble::new(vec![Tree::constant(2.0, 10.0)], 1.0, vec!["a".into()]).unwrap();
        assert_eq!(m.predict_row(&[123.0]).unwrap(), 3.0);
    }

    #[test]
    fn routing_uses_strict_less_than() {
        let t = Tree::stump(0, 2.5, (-1.0, 2.0), (1.0, 2.0), 1.0);
        assert_eq!(t.predict_row(&[2.4]), -1.0);
        assert_eq!(t.predict_row(&[2.5]), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let m = Ensemble::new(vec![], 0.0, vec!["a".into()]).unwrap();
        assert!(matches!(
            m.predict_row(&[1.0, 2.0]),
            Err(Error::Dimension {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn structure_checks() {
        let bad_cover = vec![
            Node::split(0, 1.0, 1, 2, 1.0, 5.0),
            Node::leaf(0.0, 2.0),
            Node::leaf(0.0, 2.0),
        ];
        assert!(Tree::new(bad_cover).is_err());
        let zero_cover = vec![Node::leaf(1.0, 0.0)];
        assert!(Tree::new(zero_cover).is_err());
        let cycle = vec![Node::split(0, 1.0, 0, 1, 1.0, 2.0), Node::leaf(0.0, 1.0)];
        assert!(Tree::new(cycle).is_err());
        let orphan = vec![Node::leaf(1.0, 1.0), Node::leaf(1.0, 1.0)];
        assert!(Tree::new(orphan).is_err());
        assert!(Tree::new(
            Tree::stump(0, 1.0, (1.0, 1.0), (2.0, 3.0), 0.5)
                .nodes()
                .to_vec()
        )
        .is_ok());
    }

    #[test]
    fn feature_index_bounds() {
        let t = Tree::stump(3, 1.0, (1.0, 1.0), (2.0, 1.0), 0.5);
        assert!(Ensemble::new(vec![t], 0.0, vec!["a".into()]).is_err());
    }

    #[test]
    fn expected_value_is_cover_weighted() {
        let t = Tree::stump(0, 1.0, (1.0, 1.0), (5.0, 3.0), 0.5);
        assert_eq!(t.expected_value(), 4.0);
    }
}
