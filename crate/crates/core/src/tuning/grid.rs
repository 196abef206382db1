use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{r_squared, rmsle};
use super::split::{kfold, split_train_test};
use crate::error::{Error, Result};
use crate::gbt::{self, TrainConfig};
use crate::matrix::Dataset;

/// Candidate values per tuned hyperparameter; the grid is their Cartesian
/// product, enumerated with `max_depth` outermost and `colsample_bytree`
/// innermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub max_depth: Vec<usize>,
    pub min_child_weight: Vec<f64>,
    pub eta: Vec<f64>,
    pub subsample: Vec<f64>,
    pub colsample_bytree: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            max_depth: vec![5, 6, 7, 8],
            min_child_weight: vec![1.0, 3.0, 5.0],
            eta: vec![0.01, 0.05, 0.1],
            subsample: vec![0.8, 1.0],
            colsample_bytree: vec![0.7, 0.8, 1.0],
        }
    }
}

/// One grid configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub eta: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
}

impl GridPoint {
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            max_depth: self.max_depth,
            min_child_weight: self.min_child_weight,
            eta: self.eta,
            subsample: self.subsample,
            colsample_bytree: self.colsample_bytree,
            ..base.clone()
        }
    }
}

impl GridSpec {
    pub fn size(&self) -> usize {
        self.max_depth.len()
            * self.min_child_weight.len()
            * self.eta.len()
            * self.subsample.len()
            * self.colsample_bytree.len()
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.size());
        for &max_depth in &self.max_depth {
            for &min_child_weight in &self.min_child_weight {
                for &eta in &self.eta {
                    for &subsample in &self.subsample {
                        for &colsample_bytree in &self.colsample_bytree {
                            out.push(GridPoint {
                                max_depth,
                                min_child_weight,
                                eta,
                                subsample,
                                colsample_bytree,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, point: &GridPoint) -> bool {
        self.points().contains(point)
    }

    /// Every candidate must produce a valid configuration on top of `base`.
    pub fn validate(&self, base: &TrainConfig, n_features: usize) -> Result<()> {
        if self.size() == 0 {
            return Err(Error::validation(
                "grid is empty: every hyperparameter needs at least one candidate",
            ));
        }
        for (index, point) in self.points().iter().enumerate() {
            point
                .apply(base)
                .validate(n_features)
                .map_err(|e| Error::GridPoint {
                    index,
                    source: Box::new(e),
                })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    pub folds: usize,
    pub train_fraction: f64,
    /// Drives the train/test split, the fold assignment and model training.
    pub seed: u64,
    /// Settings for everything the grid does not vary.
    pub base: TrainConfig,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            train_fraction: 0.8,
            seed: 0,
            base: TrainConfig::default(),
        }
    }
}

/// Cross-validation results for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRecord {
    pub index: usize,
    pub point: GridPoint,
    pub fold_rmsle: Vec<f64>,
    pub fold_r2: Vec<f64>,
    pub mean_rmsle: f64,
    pub sd_rmsle: f64,
    pub mean_r2: f64,
    pub sd_r2: f64,
    /// 1 = best.
    pub rank: usize,
    pub winner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    pub seed: u64,
    pub folds: usize,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// In grid order.
    pub records: Vec<GridRecord>,
    /// Index into `records` of the best configuration.
    pub winner: usize,
}

impl TuneReport {
    pub fn winning(&self) -> &GridRecord {
        &self.records[self.winner]
    }
}

/// Training and validation index sets for each fold.
pub fn fold_assignments(folds: &[Vec<usize>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..folds.len())
        .map(|held| {
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(f, _)| *f != held)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            train.sort_unstable();
            (train, folds[held].clone())
        })
        .collect()
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Splits `data` into training and test parts, then cross-validates every
/// grid point on the training part only. The winner has the lowest mean
/// fold RMSLE; ties go to the smaller `max_depth`, then the earlier grid
/// position.
pub fn grid_search(data: &Dataset, grid: &GridSpec, options: &TuneOptions) -> Result<TuneReport> {
    let base = TrainConfig {
        seed: options.seed,
        ..options.base.clone()
    };
    grid.validate(&base, data.feature_names.len())?;
    let points = grid.points();
    log::info!(
        "grid search over {} configurations x {} folds",
        points.len(),
        options.folds
    );

    let (train_idx, test_idx) = split_train_test(data.len(), options.train_fraction, options.seed)?;
    let folds = kfold(&train_idx, options.folds, options.seed)?;
    let assignments = fold_assignments(&folds);

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..assignments.len()).map(move |f| (p, f)))
        .collect();
    let scores: Vec<Result<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(p, f)| {
            let (fit_rows, val_rows) = &assignments[f];
            let fit_data = data.subset(fit_rows);
            let val_data = data.subset(val_rows);
            let model = gbt::fit(&fit_data, &points[p].apply(&base))?;
            let pred = model.predict(&val_data.features)?;
            Ok((
                rmsle(&val_data.target, &pred)?,
                r_squared(&val_data.target, &pred)?,
            ))
        })
        .collect();

    let k = assignments.len();
    let mut records = Vec::with_capacity(points.len());
    for (index, point) in points.iter().enumerate() {
        let mut fold_rmsle = Vec::with_capacity(k);
        let mut fold_r2 = Vec::with_capacity(k);
        for f in 0..k {
            match &scores[index * k + f] {
                Ok((r, q)) => {
                    fold_rmsle.push(*r);
                    fold_r2.push(*q);
                }
                Err(e) => {
                    return Err(Error::GridPoint {
                        index,
                        source: Box::new(Error::validation(format!("fold {f}: {e}"))),
                    })
                }
            }
        }
        let (mean_rmsle, sd_rmsle) = mean_sd(&fold_rmsle);
        let (mean_r2, sd_r2) = mean_sd(&fold_r2);
        records.push(GridRecord {
            index,
            point: *point,
            fold_rmsle,
            fold_r2,
            mean_rmsle,
            sd_rmsle,
            mean_r2,
            sd_r2,
            rank: 0,
            winner: false,
        });
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.mean_rmsle
            .total_cmp(&rb.mean_rmsle)
            .then(ra.point.max_depth.cmp(&rb.point.max_depth))
            .then(a.cmp(&b))
    });
    for (r, &i) in order.iter().enumerate() {
        records[i].rank = r + 1;
    }
    let winner = order[0];
    records[winner].winner = true;

    Ok(TuneReport {
        seed: options.seed,
        folds: k,
        n_rows: data.len(),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        train_indices: train_idx,
        test_indices: test_idx,
        records,
        winner,
    })
}

/// One row per grid point, per-fold scores in `rmsle_fold<i>` / `r2_fold<i>` columns.
pub fn write_report_csv<W: Write>(report: &TuneReport, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = [
        "index",
        "max_depth",
        "min_child_weight",
        "eta",
        "subsample",
        "colsample_bytree",
        "mean_rmsle",
        "sd_rmsle",
        "mean_r2",
        "sd_r2",
        "rank",
        "winner",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=report.folds).map(|f| format!("rmsle_fold{f}")));
    header.extend((1..=report.folds).map(|f| format!("r2_fold{f}")));
    wtr.write_record(&header)?;
    for r in &report.records {
        let mut row = vec![
            r.index.to_string(),
            r.point.max_depth.to_string(),
            r.point.min_child_weight.to_string(),
            r.point.eta.to_string(),
            r.point.subsample.to_string(),
            r.point.colsample_bytree.to_string(),
            r.mean_rmsle.to_string(),
            r.sd_rmsle.to_string(),
            r.mean_r2.to_string(),
            r.sd_r2.to_string(),
            r.rank.to_string(),
            u8::from(r.winner).to_string(),
        ];
        row.extend(r.fold_rmsle.iter().map(f64::to_string));
        row.extend(r.fold_r2.iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(report: &TuneReport, writer: W) -> Result<()> {
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, report)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    #[test]
    fn default_grid_contains_reported_optima() {
        let g = GridSpec::default();
        assert_eq!(g.size(), 4 * 3 * 3 * 2 * 3);
        let pre = GridPoint {
            max_depth: 7,
            min_child_weight: 1.0,
            eta: 0.01,
            subsample: 0.8,
            colsample_bytree: 0.7,
        };
        let pan = GridPoint {
            max_depth: 8,
            min_child_weight: 3.0,
            eta: 0.01,
            subsample: 0.8,
            colsample_bytree: 1.0,
        };
        assert!(g.contains(&pre));
        assert!(g.contains(&pan));
    }

    #[test]
    fn enumeration_order() {
        let g = GridSpec {
            max_depth: vec![1, 2],
            min_child_weight: vec![1.0],
            eta: vec![0.1],
            subsample: vec![1.0],
            colsample_bytree: vec![0.5, 1.0],
        };
        let p = g.points();
        assert_eq!((p[0].max_depth, p[0].colsample_bytree), (1, 0.5));
        assert_eq!((p[1].max_depth, p[1].colsample_bytree), (1, 1.0));
        assert_eq!((p[2].max_depth, p[2].colsample_bytree), (2, 0.5));
    }

    #[test]
    fn invalid_candidate_is_named() {
        let g = GridSpec {
            eta: vec![0.1, 2.0],
            ..GridSpec::default()
        };
        let err = g.validate(&TrainConfig::default(), 18).unwrap_err();
        // 2 subsample x 3 colsample points per eta value
        assert!(matches!(err, Error::GridPoint { index: 6, .. }), "{err}");
        let empty = GridSpec {
            eta: vec![],
            ..GridSpec::default()
        };
        assert!(empty.validate(&TrainConfig::default(), 18).is_err());
    }

    #[test]
    fn fold_hygiene() {
        let idx: Vec<usize> = (0..57).collect();
        let folds = kfold(&idx, 10, 4).unwrap();
        for (train, val) in fold_assignments(&folds) {
            assert!(val.iter().all(|v| train.binary_search(v).is_err()));
            assert_eq!(train.len() + val.len(), idx.len());
        }
    }

    #[test]
    fn constant_fold_target_is_annotated() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64]).collect();
        let data = Dataset::new(
            "y",
            vec!["x".into()],
            DenseMatrix::from_rows(&rows).unwrap(),
            vec![3.0; 20],
        )
        .unwrap();
        let grid = GridSpec {
            max_depth: vec![2],
            min_child_weight: vec![1.0],
            eta: vec![0.3],
            subsample: vec![1.0],
            colsample_bytree: vec![1.0],
        };
        let opts = TuneOptions {
            folds: 2,
            base: TrainConfig {
                num_rounds: 3,
                early_stopping: None,
                ..Default::default()
            },
            ..Default::default()
        };
        let err = grid_search(&data, &grid, &opts).unwrap_err();
        assert!(matches!(err, Error::GridPoint { index: 0, .. }), "{err}");
    }
}
