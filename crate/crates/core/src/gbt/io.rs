//! JSON model document.
//!
//! ```json
//! {
//!   "format": "demand-gbt",
//!   "version": 1,
//!   "feature_names": ["hour_of_day", ...],
//!   "base_score": 2385.1,
//!   "target_transform": "identity",
//!   "config": { "max_depth": 7, ..., "seed": 42 },
//!   "trees": [ { "nodes": [
//!       { "id": 0, "cover": 40.0, "feature": 0, "threshold": 6.5, "left": 1, "right": 2, "gain": 12.5 },
//!       { "id": 1, "cover": 18.0, "leaf": -3.25 }, ...
//!   ] } ]
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form, so a loaded model
//! predicts bit-identically to the saved one.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::{TargetTransform, TrainConfig};
use super::tree::{Ensemble, Node, NodeKind, Tree};
use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "demand-gbt";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    feature_names: Vec<String>,
    base_score: f64,
    target_transform: TargetTransform,
    #[serde(default)]
    config: Option<TrainConfig>,
    trees: Vec<TreeDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDocument {
    nodes: Vec<NodeDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDocument {
    id: usize,
    cover: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaf: Option<f64>,
}

impl NodeDocument {
    fn from_node(id: usize, node: &Node) -> Self {
        let mut doc = NodeDocument {
            id,
            cover: node.cover,
            feature: None,
            threshold: None,
            left: None,
            right: None,
            gain: None,
            leaf: None,
        };
        match node.kind {
            NodeKind::Split {
                feature,
                threshold,
                left,
                right,
                gain,
            } => {
                doc.feature = Some(feature);
                doc.threshold = Some(threshold);
                doc.left = Some(left);
                doc.right = Some(right);
                doc.gain = Some(gain);
            }
            NodeKind::Leaf { value } => doc.leaf = Some(value),
        }
        doc
    }

    fn into_node(self) -> std::result::Result<Node, String> {
        let split = (
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.gain,
        );
        match (self.leaf, split) {
            (Some(value), (None, None, None, None, None)) => Ok(Node::leaf(value, self.cover)),
            (None, (Some(feature), Some(threshold), Some(left), Some(right), Some(gain))) => {
                Ok(Node::split(feature, threshold, left, right, gain, self.cover))
            }
            _ => Err("node must be either a leaf {leaf} or a split {feature, threshold, left, right, gain}".into()),
        }
    }
}

pub fn save_model<W: Write>(model: &Ensemble, sink: W) -> Result<()> {
    let doc = ModelDocument {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        feature_names: model.feature_names.clone(),
        base_score: model.base_score,
        target_transform: model.target_transform,
        config: model.config.clone(),
        trees: model
            .trees
            .iter()
            .map(|t| TreeDocument {
                nodes: t
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(i, n)| NodeDocument::from_node(i, n))
                    .collect(),
            })
            .collect(),
    };
    let mut sink = sink;
    serde_json::to_writer_pretty(&mut sink, &doc)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn save_model_string(model: &Ensemble) -> Result<String> {
    let mut buf = Vec::new();
    save_model(model, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Reads a model document. Nothing is returned unless the whole document
/// decodes and every tree passes its structural checks.
pub fn load_model<R: Read>(source: R) -> Result<Ensemble> {
    let mut de = serde_json::Deserializer::from_reader(source);
    let doc: ModelDocument =
        serde_path_to_error::deserialize(&mut de).map_err(|e| Error::ModelFormat {
            path: match e.path().to_string().as_str() {
                "." => "<document>".to_string(),
                p => p.to_string(),
            },
            message: e.inner().to_string(),
        })?;
    de.end().map_err(|e| Error::ModelFormat {
        path: "<document>".into(),
        message: e.to_string(),
    })?;

    if doc.format != FORMAT_NAME {
        return Err(Error::ModelFormat {
            path: "format".into(),
            message: format!("expected `{FORMAT_NAME}`, found `{}`", doc.format),
        });
    }
    if doc.version != FORMAT_VERSION {
        return Err(Error::ModelFormat {
            path: "version".into(),
            message: format!("unsupported version {}", doc.version),
        });
    }
    if !doc.base_score.is_finite() {
        return Err(Error::ModelFormat {
            path: "base_score".into(),
            message: "not finite".into(),
        });
    }

    let n_features = doc.feature_names.len();
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (t, tree_doc) in doc.trees.into_iter().enumerate() {
        let mut nodes = Vec::with_capacity(tree_doc.nodes.len());
        for (i, node_doc) in tree_doc.nodes.into_iter().enumerate() {
            let path = format!("trees[{t}].nodes[{i}]");
            if node_doc.id != i {
                return Err(Error::ModelFormat {
                    path,
                    message: format!("id {} does not match position {i}", node_doc.id),
                });
            }
            let node = node_doc.into_node().map_err(|message| Error::ModelFormat {
                path: path.clone(),
                message,
            })?;
            if let NodeKind::Split { feature, .. } = node.kind {
                if feature >= n_features {
                    return Err(Error::ModelFormat {
                        path: format!("{path}.feature"),
                        message: format!(
                            "feature {feature} out of range for {n_features} features"
                        ),
                    });
                }
            }
            nodes.push(node);
        }
        let tree = Tree::from_nodes_unchecked(nodes);
        tree.check_structure()
            .map_err(|(i, message)| Error::ModelFormat {
                path: format!("trees[{t}].nodes[{i}]"),
                message,
            })?;
        trees.push(tree);
    }

    Ok(Ensemble {
        trees,
        base_score: doc.base_score,
        feature_names: doc.feature_names,
        target_transform: doc.target_transform,
        config: doc.config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump_model() -> Ensemble {
        let t = Tree::stump(0, 2.5, (0.0, 2.0), (8.0, 2.0), 32.0);
        Ensemble::new(vec![t], 1.0, vec!["x".into()]).unwrap()
    }

    #[test]
    fn round_trip_preserves_structure() {
        let m = stump_model();
        let text = save_model_string(&m).unwrap();
        let back = load_model(text.as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_model_document() {
        let m = Ensemble::new(vec![], 4.25, vec!["a".into(), "b".into()]).unwrap();
        let text = save_model_string(&m).unwrap();
        let back = load_model(text.as_bytes()).unwrap();
        assert!(back.trees.is_empty());
        assert_eq!(back.predict_row(&[1.0, 2.0]).unwrap(), 4.25);
    }

    #[test]
    fn truncated_document_fails() {
        let text = save_model_string(&stump_model()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            load_model(cut.as_bytes()),
            Err(Error::ModelFormat { .. })
        ));
    }

    #[test]
    fn bad_child_reports_node_path() {
        let text = save_model_string(&stump_model())
            .unwrap()
            .replace("\"right\": 2", "\"right\": 9");
        match load_model(text.as_bytes()) {
            Err(Error::ModelFormat { path, .. }) => assert_eq!(path, "trees[0].nodes[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_reports_field_path() {
        let text = save_model_string(&stump_model())
            .unwrap()
            .replace("\"cover\": 2.0", "\"cover\": \"two\"");
        match load_model(text.as_bytes()) {
            Err(Error::ModelFormat { path, .. }) => {
                assert!(path.starts_with("trees[0].nodes[1]"), "{path}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_node_rejected() {
        let text = save_model_string(&stump_model()).unwrap().replacen(
            "\"leaf\": 0.0",
            "\"leaf\": 0.0, \"feature\": 0",
            1,
        );
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(Error::ModelFormat { .. })
        ));
    }

    #[test]
    fn wrong_format_name() {
        let text = save_model_string(&stump_model())
            .unwrap()
            .replace(FORMAT_NAME, "other");
        assert!(load_model(text.as_bytes()).is_err());
    }
}
