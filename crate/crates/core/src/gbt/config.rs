use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scale the trees are fit on. Predictions are always returned on the
/// original target scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    #[default]
    Identity,
    /// Fit `ln(1 + y)`; predictions are mapped back with `exp(m) - 1`.
    Log1p,
}

impl TargetTransform {
    pub fn forward(self, y: f64) -> f64 {
        match self {
            TargetTransform::Identity => y,
            TargetTransform::Log1p => y.ln_1p(),
        }
    }

    pub fn inverse(self, margin: f64) -> f64 {
        match self {
            TargetTransform::Identity => margin,
            TargetTransform::Log1p => margin.exp_m1(),
        }
    }
}

impl std::str::FromStr for TargetTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" | "none" | "raw" => Ok(TargetTransform::Identity),
            "log1p" => Ok(TargetTransform::Log1p),
            other => Err(Error::validation(format!(
                "unknown target transform `{other}`"
            ))),
        }
    }
}

/// Hold out part of the training rows and stop once the held-out RMSLE
/// has not improved for `patience` rounds. The ensemble is truncated to
/// the best round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopping {
    pub holdout_fraction: f64,
    pub patience: usize,
}

impl Default for EarlyStopping {
    fn default() -> Self {
        Self {
            holdout_fraction: 0.1,
            patience: 50,
        }
    }
}

/// Boosting hyperparameters. Names follow the usual XGBoost spelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_depth: usize,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    pub eta: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub num_rounds: usize,
    /// `None` starts from the mean of the (transformed) training targets.
    pub base_score: Option<f64>,
    pub seed: u64,
    pub target_transform: TargetTransform,
    pub early_stopping: Option<EarlyStopping>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_depth: 6,
            min_child_weight: 1.0,
            eta: 0.01,
            subsample: 1.0,
            colsample_bytree: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            num_rounds: 2000,
            base_score: None,
            seed: 0,
            target_transform: TargetTransform::Identity,
            early_stopping: Some(EarlyStopping::default()),
        }
    }
}

fn in_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{name} = {v} must lie in (0, 1]"
        )))
    }
}

impl TrainConfig {
    /// Number of columns drawn per tree.
    pub fn columns_per_tree(&self, n_features: usize) -> usize {
        ((self.colsample_bytree * n_features as f64 + 1e-9).floor() as usize)
            .clamp(1, n_features.max(1))
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::validation("max_depth must be at least 1"));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::validation(format!(
                "min_child_weight = {} must be a nonnegative number",
                self.min_child_weight
            )));
        }
        in_unit_interval("eta", self.eta)?;
        in_unit_interval("subsample", self.subsample)?;
        in_unit_interval("colsample_bytree", self.colsample_bytree)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation(format!(
                "lambda = {} must be nonnegative",
                self.lambda
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation(format!(
                "gamma = {} must be nonnegative",
                self.gamma
            )));
        }
        if let Some(b) = self.base_score {
            if !b.is_finite() {
                return Err(Error::validation("base_score must be finite"));
            }
        }
        if self.colsample_bytree * n_features as f64 + 1e-9 < 1.0 {
            return Err(Error::validation(format!(
                "colsample_bytree = {} selects no column out of {n_features}",
                self.colsample_bytree
            )));
        }
        if let Some(es) = self.early_stopping {
            if !(es.holdout_fraction > 0.0 && es.holdout_fraction < 1.0) {
                return Err(Error::validation(format!(
                    "early stopping holdout fraction {} must lie in (0, 1)",
                    es.holdout_fraction
                )));
            }
            if es.patience == 0 {
                return Err(Error::validation(
                    "early stopping patience must be at least 1",
                ));
            }
        }
        Ok(())
    }
}
