//! Run configuration: a flat `key = value` file with `#` comments.
//!
//! Relative paths are resolved against the directory holding the config
//! file (or the working directory when no file is given).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use demand_core::gbt::{EarlyStopping, ImportanceType, TargetTransform, TrainConfig};
use demand_core::ingest::{PeriodTag, TripField, TripSchema};
use demand_core::tuning::GridSpec;

use crate::error::{CliError, Result};

const KEYS: &[&str] = &[
    "seed",
    "output.dir",
    "data.matrix",
    "data.check_schema",
    "ingest.trips",
    "ingest.weather",
    "ingest.holidays",
    "ingest.period",
    "split.fraction",
    "train.max_depth",
    "train.min_child_weight",
    "train.eta",
    "train.subsample",
    "train.colsample_bytree",
    "train.lambda",
    "train.gamma",
    "train.num_rounds",
    "train.base_score",
    "train.target_transform",
    "train.early_stopping",
    "train.patience",
    "train.holdout_fraction",
    "train.importance",
    "train.params_from",
    "grid.max_depth",
    "grid.min_child_weight",
    "grid.eta",
    "grid.subsample",
    "grid.colsample_bytree",
    "grid.folds",
    "explain.model",
    "explain.rows",
    "explain.dependence",
    "explain.force_samples",
];

const COLUMN_PREFIX: &str = "ingest.column.";

#[derive(Debug, Clone)]
pub struct RunConfig {
    base_dir: PathBuf,
    entries: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        return Ok(());
    }
    if let Some(field) = key.strip_prefix(COLUMN_PREFIX) {
        if TripField::from_key(field).is_some() {
            return Ok(());
        }
    }
    Err(CliError::config(format!("unknown config key `{key}`")))
}

fn split_pair(line: &str) -> Option<(String, String)> {
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then(|| (k.to_string(), v.trim().to_string()))
}

impl RunConfig {
    pub fn empty(base_dir: impl Into<PathBuf>) -> Self {
        Self {
            base_dir: base_dir.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config = Self::empty(base_dir);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line).ok_or_else(|| {
                CliError::config(format!("config line {}: expected `key = value`", i + 1))
            })?;
            check_key(&key).map_err(|e| CliError::config(format!("config line {}: {e}", i + 1)))?;
            config.entries.insert(key, value);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::missing(path, e.to_string()))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, dir)
    }

    /// Applies a `key=value` override from the command line.
    pub fn set(&mut self, pair: &str) -> Result<()> {
        let (key, value) = split_pair(pair)
            .ok_or_else(|| CliError::config(format!("override `{pair}` is not key=value")))?;
        check_key(&key)?;
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::config(format!("config key `{key}` is required")))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config(format!("`{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<T>()
                    .map_err(|e| CliError::config(format!("`{key}` item `{item}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn resolve(&self, raw: &str) -> PathBuf {
        let p = Path::new(raw);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.resolve(v))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.path("output.dir")
            .unwrap_or_else(|| self.resolve("out"))
    }

    pub fn matrix_path(&self) -> PathBuf {
        self.path("data.matrix")
            .unwrap_or_else(|| self.output_dir().join("matrix.csv"))
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.parse_value("seed")?.unwrap_or(0))
    }

    pub fn period(&self) -> Result<PeriodTag> {
        self.require("ingest.period")?
            .parse()
            .map_err(|e| CliError::config(format!("`ingest.period`: {e}")))
    }

    pub fn trip_schema(&self) -> Result<TripSchema> {
        let mut schema = TripSchema::legacy();
        for (key, column) in self.entries.range(COLUMN_PREFIX.to_string()..) {
            let Some(field) = key.strip_prefix(COLUMN_PREFIX) else {
                break;
            };
            schema
                .remap(field, column.clone())
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        Ok(schema)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let transform: Option<TargetTransform> = self
            .get("train.target_transform")
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::config(format!("`train.target_transform`: {e}")))
            })
            .transpose()?;
        let early_default = EarlyStopping::default();
        let early_stopping = if self.parse_value("train.early_stopping")?.unwrap_or(true) {
            Some(EarlyStopping {
                holdout_fraction: self
                    .parse_value("train.holdout_fraction")?
                    .unwrap_or(early_default.holdout_fraction),
                patience: self
                    .parse_value("train.patience")?
                    .unwrap_or(early_default.patience),
            })
        } else {
            None
        };
        Ok(TrainConfig {
            max_depth: self.parse_value("train.max_depth")?.unwrap_or(d.max_depth),
            min_child_weight: self
                .parse_value("train.min_child_weight")?
                .unwrap_or(d.min_child_weight),
            eta: self.parse_value("train.eta")?.unwrap_or(d.eta),
            subsample: self.parse_value("train.subsample")?.unwrap_or(d.subsample),
            colsample_bytree: self
                .parse_value("train.colsample_bytree")?
                .unwrap_or(d.colsample_bytree),
            lambda: self.parse_value("train.lambda")?.unwrap_or(d.lambda),
            gamma: self.parse_value("train.gamma")?.unwrap_or(d.gamma),
            num_rounds: self
                .parse_value("train.num_rounds")?
                .unwrap_or(d.num_rounds),
            base_score: self.parse_value("train.base_score")?.or(d.base_score),
            seed: self.seed()?,
            target_transform: transform.unwrap_or(d.target_transform),
            early_stopping,
        })
    }

    pub fn importance_type(&self) -> Result<ImportanceType> {
        self.get("train.importance")
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::config(format!("`train.importance`: {e}")))
            })
            .transpose()
            .map(Option::unwrap_or_default)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let d = GridSpec::default();
        Ok(GridSpec {
            max_depth: self.list("grid.max_depth")?.unwrap_or(d.max_depth),
            min_child_weight: self
                .list("grid.min_child_weight")?
                .unwrap_or(d.min_child_weight),
            eta: self.list("grid.eta")?.unwrap_or(d.eta),
            subsample: self.list("grid.subsample")?.unwrap_or(d.subsample),
            colsample_bytree: self
                .list("grid.colsample_bytree")?
                .unwrap_or(d.colsample_bytree),
        })
    }

    pub fn split_fraction(&self) -> Result<f64> {
        Ok(self.parse_value("split.fraction")?.unwrap_or(0.8))
    }
}
