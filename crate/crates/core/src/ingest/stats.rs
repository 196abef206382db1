use std::io::Write;

use crate::error::{Error, Result};
use crate::matrix::Dataset;

/// Summary statistics for one matrix column. `sd` is the sample standard
/// deviation (n - 1 denominator), defined as 0 for a single row.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableStats {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

fn column_stats(name: &str, values: &[f64]) -> VariableStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    VariableStats {
        name: name.to_string(),
        n,
        mean,
        sd,
        min,
        max,
    }
}

/// Statistics for the target followed by every feature, in column order.
pub fn descriptive_stats(data: &Dataset) -> Result<Vec<VariableStats>> {
    if data.is_empty() {
        return Err(Error::validation("cannot describe an empty matrix"));
    }
    let mut out = vec![column_stats(&data.target_name, &data.target)];
    for (j, name) in data.feature_names.iter().enumerate() {
        out.push(column_stats(name, &data.features.column(j)));
    }
    Ok(out)
}

/// Writes `variable,n,mean,sd,min,max`; `sd` is the sample standard deviation.
pub fn write_stats_csv<W: Write>(stats: &[VariableStats], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["variable", "n", "mean", "sd", "min", "max"])?;
    for s in stats {
        wtr.write_record([
            s.name.clone(),
            s.n.to_string(),
            s.mean.to_string(),
            s.sd.to_string(),
            s.min.to_string(),
            s.max.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
