use std::io::Write;

use super::{pearson, ShapExplanation};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Below this many samples the interaction heuristic is not attempted.
pub const MIN_DEPENDENCE_SAMPLES: usize = 20;

const BINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceView {
    pub feature: usize,
    /// Feature used to color the scatter.
    pub color_feature: usize,
    /// Interaction score for every feature; the plotted feature's own slot is 0.
    pub scores: Vec<f64>,
    /// Per sample: (feature value, SHAP value, coloring-feature value).
    pub triples: Vec<(f64, f64, f64)>,
    pub warning: Option<String>,
}

/// Average ranks (1-based); tied values share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Interaction score of `other` with the target feature: samples are cut
/// into deciles of the target feature's value; within each decile the
/// target's SHAP values are regressed on the rank of `other`, and the
/// explained sum of squares is added up over deciles.
fn interaction_score(order: &[usize], shap: &[f64], other: &[f64]) -> f64 {
    let n = order.len();
    let (base, extra) = (n / BINS, n % BINS);
    let mut start = 0;
    let mut total = 0.0;
    for b in 0..BINS {
        let size = base + usize::from(b < extra);
        let bin = &order[start..start + size];
        start += size;
        if bin.len() < 2 {
            continue;
        }
        let s: Vec<f64> = bin.iter().map(|&i| shap[i]).collect();
        let ranks = average_ranks(&bin.iter().map(|&i| other[i]).collect::<Vec<_>>());
        if let Some(r) = pearson(&ranks, &s) {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let ss: f64 = s.iter().map(|v| (v - mean).powi(2)).sum();
            total += r * r * ss;
        }
    }
    total
}

/// Dependence data for `feature`, colored by the feature with the highest
/// interaction score (ties to the lower index). With fewer than
/// [`MIN_DEPENDENCE_SAMPLES`] samples the first other feature is used and
/// a warning is attached.
pub fn dependence(
    explanations: &[ShapExplanation],
    x: &DenseMatrix,
    feature: usize,
) -> Result<DependenceView> {
    let m = x.n_cols();
    if feature >= m {
        return Err(Error::validation(format!(
            "feature index {feature} out of range for {m} features"
        )));
    }
    if m < 2 {
        return Err(Error::validation(
            "dependence coloring needs at least two features",
        ));
    }
    if explanations.len() != x.n_rows() {
        return Err(Error::validation(format!(
            "{} explanations for {} samples",
            explanations.len(),
            x.n_rows()
        )));
    }
    if let Some(e) = explanations.iter().find(|e| e.contributions.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: e.contributions.len(),
        });
    }

    let shap: Vec<f64> = explanations
        .iter()
        .map(|e| e.contributions[feature])
        .collect();
    let values = x.column(feature);
    let mut scores = vec![0.0; m];
    let first_other = usize::from(feature == 0);

    let (color_feature, warning) = if explanations.len() < MIN_DEPENDENCE_SAMPLES {
        let msg = format!(
            "only {} samples (< {MIN_DEPENDENCE_SAMPLES}); interaction heuristic skipped, coloring by feature {first_other}",
            explanations.len()
        );
        log::warn!("{msg}");
        (first_other, Some(msg))
    } else {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut best = first_other;
        for j in (0..m).filter(|&j| j != feature) {
            scores[j] = interaction_score(&order, &shap, &x.column(j));
            if scores[j] > scores[best] {
                best = j;
            }
        }
        (best, None)
    };

    let triples = (0..x.n_rows())
        .map(|i| (values[i], shap[i], x.get(i, color_feature)))
        .collect();
    Ok(DependenceView {
        feature,
        color_feature,
        scores,
        triples,
        warning,
    })
}

/// Header `sample_id,<feature>,shap_<feature>,<color feature>`, one row per sample.
pub fn write_dependence_csv<W: Write>(
    view: &DependenceView,
    names: &[String],
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let feature = &names[view.feature];
    wtr.write_record([
        "sample_id".to_string(),
        feature.clone(),
        format!("shap_{feature}"),
        names[view.color_feature].clone(),
    ])?;
    for (i, (v, s, c)) in view.triples.iter().enumerate() {
        wtr.write_record([i.to_string(), v.to_string(), s.to_string(), c.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
