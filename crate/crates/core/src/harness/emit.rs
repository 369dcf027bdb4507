//! CSV, JSON and plot-friendly output of result tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lightcone::{FrontRecord, PowerLawFit};

use super::config::Format;
use super::sweep::{BoundRow, SweepRecord};
use super::verify::VerificationReport;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    /// 17 significant digits, so a CSV round trip is bit-exact.
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// A rectangular table with a fixed column set.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        obj.insert((*c).to_string(), v.json());
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Whitespace-separated columns under a `#` header line.
    pub fn to_plotdata(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Write `stem.{csv,json,dat}` for each requested format; returns the paths.
    pub fn write(&self, dir: &Path, stem: &str, formats: &[Format]) -> Result<Vec<PathBuf>> {
        if self.rows.is_empty() {
            return Err(Error::invalid(format!("refusing to write empty table {stem}")));
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for f in formats {
            let (ext, body) = match f {
                Format::Csv => ("csv", self.to_csv()),
                Format::Json => ("json", serde_json::to_string_pretty(&self.to_json()).expect("json")),
                Format::Plotdata => ("dat", self.to_plotdata()),
            };
            let path = dir.join(format!("{stem}.{ext}"));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "t", "r", "R", "measured", "truncated", "term1", "term2", "term3", "total", "mode", "margin",
];

pub fn sweep_table(records: &[SweepRecord]) -> Table {
    Table {
        columns: SWEEP_COLUMNS.to_vec(),
        rows: records
            .iter()
            .map(|r| {
                vec![
                    Cell::Num(r.t),
                    Cell::Num(r.r),
                    Cell::Num(r.cutoff),
                    Cell::Num(r.measured),
                    Cell::Num(r.truncated),
                    Cell::Num(r.bound.term1),
                    Cell::Num(r.bound.term2),
                    Cell::Num(r.bound.term3),
                    Cell::Num(r.bound.total),
                    Cell::Text(r.bound.mode.to_string()),
                    Cell::Num(r.margin),
                ]
            })
            .collect(),
    }
}

pub fn bound_rows_table(rows: &[BoundRow]) -> Table {
    Table {
        columns: vec!["t", "r", "R", "term1", "term2", "term3", "total", "mode"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Num(r.t),
                    Cell::Num(r.r),
                    Cell::Num(r.cutoff),
                    Cell::Num(r.bound.term1),
                    Cell::Num(r.bound.term2),
                    Cell::Num(r.bound.term3),
                    Cell::Num(r.bound.total),
                    Cell::Text(r.bound.mode.to_string()),
                ]
            })
            .collect(),
    }
}

/// `r_star = inf` (CSV) or `null` (JSON) when the front lies beyond the lattice.
pub fn front_table(front: &[FrontRecord]) -> Table {
    Table {
        columns: vec!["t", "r_star", "epsilon"],
        rows: front
            .iter()
            .map(|f| vec![Cell::Num(f.t), Cell::Num(f.r_star.unwrap_or(f64::INFINITY)), Cell::Num(f.epsilon)])
            .collect(),
    }
}

pub fn fit_json(fit: &PowerLawFit) -> Value {
    serde_json::json!({
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "residual": fit.residual,
        "points_used": fit.points_used,
    })
}

pub fn report_table(report: &VerificationReport) -> Table {
    Table {
        columns: vec!["check", "point", "measured", "bound", "margin", "tolerance", "pass"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Text(r.check.clone()),
                    Cell::Text(r.point.clone()),
                    Cell::Num(r.measured),
                    Cell::Num(r.bound),
                    Cell::Num(r.margin),
                    Cell::Num(r.tolerance),
                    Cell::Text(r.pass.to_string()),
                ]
            })
            .collect(),
    }
}

/// Write a JSON value to `dir/name`.
pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).expect("json")).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
