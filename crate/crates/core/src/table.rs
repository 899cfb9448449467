//! Column-typed result tables and their CSV / Markdown / JSON renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            other => Err(format!(
                "unknown format {other:?} (expected csv, md or json)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Missing,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

#[derive(Clone, Debug)]
pub struct Column {
    pub name: String,
    /// Decimal places for [`Cell::Num`] values in this column.
    pub precision: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column(mut self, name: impl Into<String>, precision: usize) -> Self {
        self.columns.push(Column {
            name: name.into(),
            precision,
        });
        self
    }

    /// Appends a row.
    ///
    /// # Panics
    /// If the row width differs from the column count.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match column count"
        );
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    fn rendered(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.rows.iter().map(|row| {
            row.iter()
                .zip(&self.columns)
                .map(|(cell, col)| render_cell(cell, col.precision))
                .collect()
        })
    }
}

/// Rounds half away from zero at `precision` decimals and formats with
/// exactly that many digits.
pub fn format_fixed(value: f64, precision: usize) -> String {
    let scale = 10f64.powi(precision as i32);
    let rounded = (value * scale).round() / scale;
    // Avoid "-0.0" for tiny negatives that round to zero.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:.precision$}")
}

fn render_cell(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => format_fixed(*v, precision),
        Cell::Missing => String::new(),
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Renders a table. Output always ends with a single LF.
pub fn write_table(table: &Table, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<_> = table.columns.iter().map(|c| csv_escape(&c.name)).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in table.rendered() {
                let row: Vec<_> = row.iter().map(|f| csv_escape(f)).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        Format::Markdown => {
            let escape = |s: &str| s.replace('|', "\\|");
            let header: Vec<_> = table.columns.iter().map(|c| escape(&c.name)).collect();
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let sep: Vec<_> = table.columns.iter().map(|_| "---").collect();
            let _ = writeln!(out, "| {} |", sep.join(" | "));
            for row in table.rendered() {
                let row: Vec<_> = row.iter().map(|f| escape(f)).collect();
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
        Format::Json => {
            let value = to_json(table);
            out = serde_json::to_string_pretty(&value).expect("table JSON is serializable");
            out.push('\n');
        }
    }
    out
}

/// JSON view of a table: an array of objects keyed by column name, with
/// numbers rounded to their column precision.
pub fn to_json(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (cell, col) in row.iter().zip(&table.columns) {
                let v = match cell {
                    Cell::Text(s) => Value::String(s.clone()),
                    Cell::Int(v) => Value::from(*v),
                    Cell::Num(v) => format_fixed(*v, col.precision)
                        .parse::<f64>()
                        .ok()
                        .and_then(serde_json::Number::from_f64)
                        .map_or(Value::Null, Value::Number),
                    Cell::Missing => Value::Null,
                };
                obj.insert(col.name.clone(), v);
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}
