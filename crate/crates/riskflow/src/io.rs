//! Reading `date,value` return series.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};

/// How a value column becomes a return series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ReturnsMode {
    /// `v_t - v_{t-1}`.
    #[default]
    Diff,
    /// `v_t / v_{t-1}`.
    Ratio,
    /// The values are already returns.
    Level,
}

#[derive(Debug, Deserialize)]
struct Row {
    date: String,
    value: f64,
}

/// Dated observations in file order, checked for ascending ISO-8601 dates.
pub fn read_series<R: Read>(reader: R, label: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |source| Error::Csv { path: label.to_path_buf(), source };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "value"] {
        return Err(Error::Input(format!("{}: header must be `date,value`", label.display())));
    }
    let mut out: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
            .map_err(|e| Error::Input(format!("{}:{line}: bad date {:?}: {e}", label.display(), row.date)))?;
        if !row.value.is_finite() {
            return Err(Error::Input(format!("{}:{line}: value is not finite", label.display())));
        }
        if let Some((prev, _)) = out.last() {
            if date <= *prev {
                return Err(Error::Input(format!("{}:{line}: dates must be strictly ascending", label.display())));
            }
        }
        out.push((date, row.value));
    }
    Ok(out)
}

pub fn to_returns(values: &[f64], mode: ReturnsMode) -> Result<Vec<f64>> {
    let out: Vec<f64> = match mode {
        ReturnsMode::Level => values.to_vec(),
        ReturnsMode::Diff => values.windows(2).map(|w| w[1] - w[0]).collect(),
        ReturnsMode::Ratio => {
            if values[..values.len().saturating_sub(1)].contains(&0.0) {
                return Err(Error::Input("ratio returns need nonzero values".into()));
            }
            values.windows(2).map(|w| w[1] / w[0]).collect()
        }
    };
    if out.is_empty() {
        return Err(riskflow_core::RiskError::Data("no returns in input".into()).into());
    }
    Ok(out)
}

pub fn read_returns_csv(path: &Path, mode: ReturnsMode) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let series = read_series(file, path)?;
    let values: Vec<f64> = series.into_iter().map(|(_, v)| v).collect();
    to_returns(&values, mode)
}
