//! Dense row-major feature matrices and the labelled [`Dataset`] read from
//! the model-matrix CSV.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Row-major matrix of `f64` without missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl DenseMatrix {
    pub fn new(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::validation(format!(
                "matrix buffer has {} values, expected {n_rows} x {n_cols}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            n_rows,
            n_cols,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::validation(format!(
                    "row {i} has {} values, expected {n_cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            data,
            n_rows: rows.len(),
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            n_rows: indices.len(),
            n_cols: self.n_cols,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.n_cols.max(1), p % self.n_cols.max(1)))
    }
}

/// Target vector plus named feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub target_name: String,
    pub feature_names: Vec<String>,
    pub features: DenseMatrix,
    pub target: Vec<f64>,
}

impl Dataset {
    pub fn new(
        target_name: impl Into<String>,
        feature_names: Vec<String>,
        features: DenseMatrix,
        target: Vec<f64>,
    ) -> Result<Self> {
        if features.n_cols() != feature_names.len() {
            return Err(Error::Dimension {
                expected: feature_names.len(),
                got: features.n_cols(),
            });
        }
        if features.n_rows() != target.len() {
            return Err(Error::validation(format!(
                "{} feature rows but {} targets",
                features.n_rows(),
                target.len()
            )));
        }
        Ok(Self {
            target_name: target_name.into(),
            feature_names,
            features,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            target_name: self.target_name.clone(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(indices),
            target: indices.iter().map(|&i| self.target[i]).collect(),
        }
    }

    /// Reads a model matrix: header row, target in the first column,
    /// features after it, every cell a finite number.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header.len() < 2 {
            return Err(Error::Schema(format!(
                "matrix needs a target column and at least one feature, header has {} column(s)",
                header.len()
            )));
        }
        let n_cols = header.len() - 1;
        let mut target = Vec::new();
        let mut data = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::Schema(format!(
                    "data row {} has {} fields, header has {}",
                    line + 1,
                    record.len(),
                    header.len()
                )));
            }
            for (col, field) in record.iter().enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    Error::validation(format!(
                        "data row {}, column `{}`: `{field}` is not a number",
                        line + 1,
                        header[col]
                    ))
                })?;
                if !value.is_finite() {
                    return Err(Error::validation(format!(
                        "data row {}, column `{}`: missing or non-finite value",
                        line + 1,
                        header[col]
                    )));
                }
                if col == 0 {
                    target.push(value);
                } else {
                    data.push(value);
                }
            }
        }
        let n_rows = target.len();
        let features = DenseMatrix::new(data, n_rows, n_cols)?;
        Dataset::new(header[0].clone(), header[1..].to_vec(), features, target)
    }

    /// Writes the dataset with full round-trip precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec![self.target_name.as_str()];
        header.extend(self.feature_names.iter().map(String::as_str));
        wtr.write_record(&header)?;
        for (i, row) in self.features.rows().enumerate() {
            let mut fields = Vec::with_capacity(row.len() + 1);
            fields.push(self.target[i].to_string());
            fields.extend(row.iter().map(f64::to_string));
            wtr.write_record(&fields)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
