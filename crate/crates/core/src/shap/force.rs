use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ShapExplanation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceEntry {
    pub feature: String,
    pub value: f64,
    pub contribution: f64,
}

/// Contributions of one sample split by direction: `push` raises the
/// prediction above the base value, `pull` lowers it. Both lists are
/// ordered by decreasing magnitude; zero contributions appear in neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<usize>,
    pub base_value: f64,
    pub prediction: f64,
    pub push: Vec<ForceEntry>,
    pub pull: Vec<ForceEntry>,
}

impl ForceRecord {
    /// Sum of all listed contributions.
    pub fn total_contribution(&self) -> f64 {
        self.push
            .iter()
            .chain(&self.pull)
            .map(|e| e.contribution)
            .sum()
    }
}

pub fn force_record(
    explanation: &ShapExplanation,
    feature_names: &[String],
    x: &[f64],
) -> ForceRecord {
    let mut entries: Vec<ForceEntry> = explanation
        .contributions
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| ForceEntry {
            feature: feature_names[j].clone(),
            value: x[j],
            contribution: c,
        })
        .collect();
    entries.sort_by(|a, b| b.contribution.abs().total_cmp(&a.contribution.abs()));
    let (push, pull) = entries.into_iter().partition(|e| e.contribution > 0.0);
    ForceRecord {
        sample_id: None,
        base_value: explanation.base_value,
        prediction: explanation.prediction,
        push,
        pull,
    }
}

pub fn write_force_json<W: Write>(record: &ForceRecord, writer: W) -> Result<()> {
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, record)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer.write_all(b"\n")?;
    Ok(())
}
