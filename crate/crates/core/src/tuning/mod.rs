//! Evaluation protocol: random train/test split, k-fold cross-validation,
//! grid search and the regression metrics used to score it.
//!
//! Folds are plain random folds. Hourly rows are not independent in time,
//! so cross-validated scores can be optimistic relative to a time-blocked
//! evaluation.

mod grid;
pub mod metrics;
mod split;

pub use grid::{
    fold_assignments, grid_search, write_report_csv, write_report_json, GridPoint, GridRecord,
    GridSpec, TuneOptions, TuneReport,
};
pub use metrics::{r_squared, rmsle, rmsle_detailed, RmsleOutcome};
pub use split::{kfold, split_train_test, MIN_SPLIT_ROWS};
