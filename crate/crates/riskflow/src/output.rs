//! Trajectory tables as CSV or JSON.

use std::io::Write;
use std::path::Path;

use riskflow_core::scenario::{MeasureSelection, PathResult};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 7] =
    ["t", "static_var", "recursive_var", "modulated_var", "static_cvar", "recursive_cvar", "modulated_cvar"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `json` for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

/// One time step of one path. Measures that were not requested are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<usize>,
    pub t: usize,
    pub static_var: Option<f64>,
    pub recursive_var: Option<f64>,
    pub modulated_var: Option<f64>,
    pub static_cvar: Option<f64>,
    pub recursive_cvar: Option<f64>,
    pub modulated_cvar: Option<f64>,
}

impl TrajectoryRow {
    fn values(&self) -> [Option<f64>; 6] {
        [
            self.static_var,
            self.recursive_var,
            self.modulated_var,
            self.static_cvar,
            self.recursive_cvar,
            self.modulated_cvar,
        ]
    }
}

/// Flattens path results; the path id is kept only when there is more than one path.
pub fn rows(results: &[PathResult]) -> Vec<TrajectoryRow> {
    let with_path = results.len() > 1;
    let mut out = Vec::new();
    for r in results {
        let n = r.var.as_ref().or(r.cvar.as_ref()).map_or(0, |t| t.records.len());
        for t in 0..n {
            let pick = |m: MeasureSelection| r.trajectory(m).map(|tr| tr.records[t]);
            let (v, c) = (pick(MeasureSelection::Var), pick(MeasureSelection::Cvar));
            out.push(TrajectoryRow {
                path: with_path.then_some(r.path),
                t,
                static_var: v.map(|x| x.static_risk),
                recursive_var: v.map(|x| x.recursive),
                modulated_var: v.map(|x| x.modulated),
                static_cvar: c.map(|x| x.static_risk),
                recursive_cvar: c.map(|x| x.recursive),
                modulated_cvar: c.map(|x| x.modulated),
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], writer: W) -> csv::Result<()> {
    let with_path = rows.iter().any(|r| r.path.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Vec::with_capacity(8);
    if with_path {
        header.push("path");
    }
    header.extend(COLUMNS);
    w.write_record(&header)?;
    for r in rows {
        let mut record: Vec<String> = Vec::with_capacity(8);
        if with_path {
            record.push(r.path.unwrap_or(0).to_string());
        }
        record.push(r.t.to_string());
        record.extend(r.values().iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[TrajectoryRow], mut writer: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writer.write_all(b"\n")
}

/// Writes trajectories to `path` in the given format.
pub fn emit_trajectories(results: &[PathResult], format: OutputFormat, path: &Path) -> Result<()> {
    let rows = rows(results);
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => {
            write_csv(&rows, &mut buf).map_err(|source| Error::Csv { path: path.to_path_buf(), source })?
        }
        OutputFormat::Json => write_json(&rows, &mut buf).map_err(|e| Error::io(path, e))?,
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parses a table written by [`write_csv`]. Fields are read with `str::parse`
/// so values round-trip bit for bit.
pub fn parse_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv { path: "<trajectories>".into(), source };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let offset = match headers.get(0) {
        Some("path") => 1,
        _ => 0,
    };
    if headers.iter().skip(offset).collect::<Vec<_>>() != COLUMNS {
        return Err(Error::Input("unexpected trajectory header".into()));
    }
    let bad = |field: &str| Error::Input(format!("bad trajectory field {field:?}"));
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let path = if offset == 1 { Some(record[0].parse().map_err(|_| bad(&record[0]))?) } else { None };
        let t = record[offset].parse().map_err(|_| bad(&record[offset]))?;
        let mut v = [None; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            let field = &record[offset + 1 + k];
            if !field.is_empty() {
                *slot = Some(field.parse::<f64>().map_err(|_| bad(field))?);
            }
        }
        out.push(TrajectoryRow {
            path,
            t,
            static_var: v[0],
            recursive_var: v[1],
            modulated_var: v[2],
            static_cvar: v[3],
            recursive_cvar: v[4],
            modulated_cvar: v[5],
        });
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> serde_json::Result<Vec<TrajectoryRow>> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use riskflow_core::scenario::{build_paper_experiment, run_experiment, PaperExperiment};

    fn run(paths: usize, measures: Vec<MeasureSelection>) -> Vec<PathResult> {
        let mut c = build_paper_experiment(PaperExperiment::GaussianMsci);
        c.n_paths = paths;
        c.measures = measures;
        run_experiment(&c).unwrap().0
    }

    fn csv_text(rows: &[TrajectoryRow]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_path_layout() {
        let text = csv_text(&rows(&run(1, vec![MeasureSelection::Var, MeasureSelection::Cvar])));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines.len(), 12);
    }

    #[test]
    fn multi_path_prepends_path_column() {
        let text = csv_text(&rows(&run(3, vec![MeasureSelection::Var])));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("path,{}", COLUMNS.join(",")));
        assert_eq!(lines.len(), 1 + 33);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[1].ends_with(",,,"));
    }

    #[test]
    fn round_trips_are_exact() {
        let rows = rows(&run(2, vec![MeasureSelection::Var, MeasureSelection::Cvar]));
        assert_eq!(parse_csv(&csv_text(&rows)).unwrap(), rows);
        let mut buf = Vec::new();
        write_json(&rows, &mut buf).unwrap();
        assert_eq!(parse_json(std::str::from_utf8(&buf).unwrap()).unwrap(), rows);
    }

    #[test]
    fn subset_keeps_header() {
        let rows = rows(&run(1, vec![MeasureSelection::Cvar]));
        let text = csv_text(&rows);
        assert!(text.starts_with(&COLUMNS.join(",")));
        let parsed = parse_csv(&text).unwrap();
        assert!(parsed.iter().all(|r| r.static_var.is_none() && r.static_cvar.is_some()));
    }
}
