use std::io::Write;

use super::{pearson, ShapExplanation};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSummary {
    pub index: usize,
    pub name: String,
    pub mean_abs_shap: f64,
    /// 1 = largest mean |SHAP|.
    pub rank: usize,
    /// Pearson correlation between the feature's values and its SHAP values;
    /// `None` when either side has zero variance.
    pub correlation: Option<f64>,
    /// Sign of `correlation`, 0 when it is undefined.
    pub correlation_sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryView {
    /// In feature order.
    pub features: Vec<FeatureSummary>,
    /// Feature indices by non-increasing mean |SHAP|; ties keep feature order.
    pub ranking: Vec<usize>,
    /// `pairs[j][i]` = (value of feature j, SHAP of feature j) for sample i.
    pub pairs: Vec<Vec<(f64, f64)>>,
}

fn check_inputs(explanations: &[ShapExplanation], x: &DenseMatrix, names: &[String]) -> Result<()> {
    if explanations.len() != x.n_rows() {
        return Err(Error::validation(format!(
            "{} explanations for {} samples",
            explanations.len(),
            x.n_rows()
        )));
    }
    if names.len() != x.n_cols() {
        return Err(Error::Dimension {
            expected: names.len(),
            got: x.n_cols(),
        });
    }
    if let Some(e) = explanations
        .iter()
        .find(|e| e.contributions.len() != x.n_cols())
    {
        return Err(Error::Dimension {
            expected: x.n_cols(),
            got: e.contributions.len(),
        });
    }
    Ok(())
}

/// Global importance and per-feature correlation sign over a set of
/// explained samples (`x` row i explained by `explanations[i]`).
pub fn summarize(
    explanations: &[ShapExplanation],
    x: &DenseMatrix,
    names: &[String],
) -> Result<SummaryView> {
    check_inputs(explanations, x, names)?;
    if explanations.is_empty() {
        return Err(Error::validation("no explanations to summarize"));
    }
    let n = explanations.len() as f64;
    let pairs: Vec<Vec<(f64, f64)>> = (0..x.n_cols())
        .map(|j| {
            explanations
                .iter()
                .enumerate()
                .map(|(i, e)| (x.get(i, j), e.contributions[j]))
                .collect()
        })
        .collect();

    let mut features: Vec<FeatureSummary> = pairs
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mean_abs_shap = p.iter().map(|(_, s)| s.abs()).sum::<f64>() / n;
            let values: Vec<f64> = p.iter().map(|(v, _)| *v).collect();
            let shap: Vec<f64> = p.iter().map(|(_, s)| *s).collect();
            let correlation = pearson(&values, &shap);
            if correlation.is_none() {
                log::warn!(
                    "feature `{}`: zero variance, correlation sign set to 0",
                    names[j]
                );
            }
            let correlation_sign = match correlation {
                Some(r) if r > 0.0 => 1,
                Some(r) if r < 0.0 => -1,
                _ => 0,
            };
            FeatureSummary {
                index: j,
                name: names[j].clone(),
                mean_abs_shap,
                rank: 0,
                correlation,
                correlation_sign,
            }
        })
        .collect();

    let mut ranking: Vec<usize> = (0..features.len()).collect();
    ranking.sort_by(|&a, &b| {
        features[b]
            .mean_abs_shap
            .total_cmp(&features[a].mean_abs_shap)
    });
    for (r, &j) in ranking.iter().enumerate() {
        features[j].rank = r + 1;
    }
    Ok(SummaryView {
        features,
        ranking,
        pairs,
    })
}

/// Long format `sample_id,feature,feature_value,shap_value`.
pub fn write_summary_csv<W: Write>(view: &SummaryView, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sample_id", "feature", "feature_value", "shap_value"])?;
    let n = view.pairs.first().map_or(0, Vec::len);
    for i in 0..n {
        for f in &view.features {
            let (v, s) = view.pairs[f.index][i];
            wtr.write_record([i.to_string(), f.name.clone(), v.to_string(), s.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// `feature,mean_abs_shap,rank,correlation_sign`, in rank order.
pub fn write_importance_csv<W: Write>(view: &SummaryView, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["feature", "mean_abs_shap", "rank", "correlation_sign"])?;
    for &j in &view.ranking {
        let f = &view.features[j];
        wtr.write_record([
            f.name.clone(),
            f.mean_abs_shap.to_string(),
            f.rank.to_string(),
            f.correlation_sign.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
