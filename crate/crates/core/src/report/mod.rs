//! Tabular and JSON output of solutions, sweeps and splines.
//!
//! Every floating-point value is written with nine significant digits in
//! plain positional notation, so a CSV file and its JSON twin carry the
//! same numbers and repeated runs produce identical bytes.

pub mod svg;

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::optimizer::PlanSolution;
use crate::sweep::{ParamSplines, SweepResult};

/// Column order of [`OutputRecord`] rows.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "r_m",
    "beta0_rad",
    "dbeta_rad",
    "dphi_rad",
    "p_avg_w",
    "p_loyd_w",
    "loyd_ratio",
    "max_kappa",
    "active_constraints",
    "iterations",
    "converged",
];

/// Formats `v` with nine significant digits, without exponent.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // exponent after rounding, so 9.9999999996 counts as 10
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() { "0".into() } else { s }
}

/// `v` rounded to nine significant digits.
pub fn round9(v: f64) -> f64 {
    sig9(v).parse().unwrap_or(v)
}

fn num(v: f64) -> Value {
    Number::from_f64(round9(v)).map(Value::Number).unwrap_or(Value::Null)
}

/// A cell of a report table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Real(v) => sig9(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(v) => num(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

/// Named columns with any number of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Rows as JSON objects keyed by column name, in column order.
    pub fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert((*c).to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect()
    }

    /// A single-row table becomes an object, anything else an array.
    pub fn to_json(&self) -> String {
        let mut rows = self.json_rows();
        let v = if rows.len() == 1 { rows.pop().unwrap() } else { Value::Array(rows) };
        let mut s = serde_json::to_string_pretty(&v).expect("json");
        s.push('\n');
        s
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub r_m: f64,
    pub beta0_rad: f64,
    pub dbeta_rad: f64,
    pub dphi_rad: f64,
    pub p_avg_w: f64,
    pub p_loyd_w: f64,
    pub loyd_ratio: f64,
    pub max_kappa: f64,
    /// Labels joined with `;`, empty when nothing is active.
    pub active_constraints: String,
    pub iterations: usize,
    pub converged: bool,
}

impl OutputRecord {
    pub fn from_solution(sol: &PlanSolution) -> Self {
        let [b0, db, dp] = sol.params();
        OutputRecord {
            r_m: sol.r,
            beta0_rad: b0,
            dbeta_rad: db,
            dphi_rad: dp,
            p_avg_w: sol.p_avg,
            p_loyd_w: sol.p_loyd,
            loyd_ratio: sol.loyd_ratio,
            max_kappa: sol.max_kappa_on_grid,
            active_constraints: sol.active_labels().join(";"),
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Real(self.r_m),
            Cell::Real(self.beta0_rad),
            Cell::Real(self.dbeta_rad),
            Cell::Real(self.dphi_rad),
            Cell::Real(self.p_avg_w),
            Cell::Real(self.p_loyd_w),
            Cell::Real(self.loyd_ratio),
            Cell::Real(self.max_kappa),
            Cell::Text(self.active_constraints.clone()),
            Cell::Int(self.iterations),
            Cell::Bool(self.converged),
        ]
    }
}

pub fn records_table(records: &[OutputRecord]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in records {
        t.push(r.cells());
    }
    t
}

pub fn sweep_records(sweep: &SweepResult) -> Vec<OutputRecord> {
    sweep.solutions.iter().map(OutputRecord::from_solution).collect()
}

pub fn sweep_table(sweep: &SweepResult) -> Table {
    records_table(&sweep_records(sweep))
}

/// Parses `sweep.csv` text back into records.
pub fn read_sweep_csv(text: &str) -> Result<Vec<OutputRecord>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineJson {
    pub knots_r: Vec<f64>,
    pub values: Vec<f64>,
    pub second_derivs: Vec<f64>,
}

/// `splines.json` contents, keyed `beta0`, `dbeta`, `dphi`.
pub fn splines_json(splines: &ParamSplines) -> String {
    let mut m = Map::new();
    for (name, s) in splines.named() {
        let arr = |xs: &[f64]| Value::Array(xs.iter().map(|&v| num(v)).collect());
        let mut entry = Map::new();
        entry.insert("knots_r".into(), arr(s.knots()));
        entry.insert("values".into(), arr(s.values()));
        entry.insert("second_derivs".into(), arr(s.second_derivs()));
        m.insert(name.to_string(), Value::Object(entry));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json");
    s.push('\n');
    s
}

pub fn read_splines_json(text: &str) -> serde_json::Result<BTreeMap<String, SplineJson>> {
    serde_json::from_str(text)
}
