//! Hourly bikeshare demand modeling.
//!
//! The crate is organized as a pipeline:
//!
//! * [`ingest`] turns raw trip, weather and holiday files into an hourly
//!   feature matrix.
//! * [`gbt`] trains second-order gradient-boosted regression trees.
//! * [`tuning`] provides the train/test split, k-fold cross-validation,
//!   grid search and the R² / RMSLE metrics.
//! * [`shap`] computes exact path-dependent Shapley attributions for a
//!   trained ensemble along with the global summaries built on them.

pub mod error;
pub mod gbt;
pub mod ingest;
pub mod matrix;
pub mod shap;
pub mod tuning;

pub use error::{Error, Result};
pub use matrix::{Dataset, DenseMatrix};
