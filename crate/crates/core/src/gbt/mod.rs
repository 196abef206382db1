//! Gradient-boosted regression trees with a squared-error objective.

mod config;
mod importance;
mod io;
mod train;
mod tree;

pub use config::{EarlyStopping, TargetTransform, TrainConfig};
pub use importance::{feature_importance, importance_ranks, ImportanceType};
pub use io::{load_model, save_model, save_model_string, FORMAT_NAME, FORMAT_VERSION};
pub use train::{fit, train};
pub use tree::{Ensemble, Node, NodeKind, Tree};

pub(crate) use train::stream_rng;
