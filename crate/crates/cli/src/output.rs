//! Result tables and their CSV / JSON renderings.

use serde::Serialize;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(Option<f64>),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x.is_finite().then_some(x))
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Float(x.filter(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[(&'static str, &'static str)]) -> Self {
        Table {
            name,
            columns: columns.iter().map(|&(name, unit)| Column { name, unit }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

/// A numerical invariant the experiment must satisfy: `value <= bound`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value: value.is_finite().then_some(value), bound, pass: value <= bound }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(Some(x)) => fmt_float(*x),
        Cell::Float(None) => String::new(),
        Cell::Text(s) => csv_field(s),
        Cell::Bool(b) => b.to_string(),
    }
}

fn checks_table(report: &Report) -> Table {
    let mut t = Table::new("checks", &[("check", "-"), ("value", "dimensionless"), ("bound", "dimensionless"), ("pass", "-")]);
    for c in &report.checks {
        t.push(vec![Cell::Text(c.name.clone()), c.value.into(), c.bound.into(), c.pass.into()]);
    }
    t
}

pub fn render_csv(cfg: &RunConfig, report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("# pawlab {VERSION}\n"));
    out.push_str(&format!("# experiment = {}\n", cfg.experiment));
    out.push_str(&format!("# seed = {}\n", cfg.seed));
    out.push_str(&format!("# format = {}\n", cfg.format.name()));
    for (k, v) in cfg.params.values() {
        out.push_str(&format!("# param {k} = {v}\n"));
    }
    let checks = checks_table(report);
    for table in report.tables.iter().chain(std::iter::once(&checks)) {
        out.push_str(&format!("# table: {}\n", table.name));
        let units: Vec<&str> = table.columns.iter().map(|c| c.unit).collect();
        out.push_str(&format!("# units: {}\n", units.join(",")));
        let names: Vec<&str> = table.columns.iter().map(|c| c.name).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    pawlab: &'static str,
    experiment: &'a str,
    seed: u64,
    format: &'static str,
    params: &'a std::collections::BTreeMap<String, String>,
    tables: Vec<&'a Table>,
    checks: &'a [Check],
}

pub fn render_json(cfg: &RunConfig, report: &Report) -> String {
    let doc = JsonReport {
        pawlab: VERSION,
        experiment: &cfg.experiment,
        seed: cfg.seed,
        format: cfg.format.name(),
        params: cfg.params.values(),
        tables: report.tables.iter().collect(),
        checks: &report.checks,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn render(cfg: &RunConfig, report: &Report) -> String {
    match cfg.format {
        Format::Csv => render_csv(cfg, report),
        Format::Json => render_json(cfg, report),
    }
}
