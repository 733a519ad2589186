//! Tabular results written as CSV or as a JSON array of row objects.

use std::io::Write;
use std::path::Path;

use crate::config::Format;
use crate::error::LabError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Shortest decimal that parses back to the same `f64`, so CSV output
    /// is both exact and byte-stable.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => match i64::try_from(*i) {
                Ok(v) => v.into(),
                Err(_) => i.to_string().into(),
            },
            Cell::Float(x) if x.is_finite() => (*x).into(),
            Cell::Float(x) => format!("{x:?}").into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
        }
    }
}

macro_rules! cell_from {
    ($($t:ty => $v:ident),*) => {$(
        impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell::$v(x.into())
            }
        }
    )*};
}
cell_from!(i32 => Int, u32 => Int, u64 => Int, i64 => Int, f64 => Float, bool => Bool, String => Text, &str => Text);

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        match i128::try_from(x) {
            Ok(v) => Cell::Int(v),
            Err(_) => Cell::Text(x.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File stem, e.g. `tail` or `tail_raw`.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self::with_columns(name, columns.iter().map(|c| c.to_string()).collect())
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.name, format.extension())
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), LabError> {
        let path = dir.join(self.file_name(format));
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.columns.iter().zip(r).map(|(c, v)| (c.clone(), v.json())).collect())
                    .collect();
                let mut f = std::fs::File::create(path)?;
                serde_json::to_writer_pretty(&mut f, &rows)?;
                f.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

/// Build a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::table::Cell::from($x)),*]
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t", &["k", "theta", "ok"]);
        t.push(row![1usize, 0.5, true]);
        t.push(row![2usize, f64::INFINITY, false]);
        t.write(dir.path(), Format::Csv).unwrap();
        let s = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(s, "k,theta,ok\n1,0.5,true\n2,inf,false\n");
        t.write(dir.path(), Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
        assert_eq!(v[0]["theta"], 0.5);
        assert_eq!(v[1]["theta"], "inf");
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = Cell::Float(x).render();
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
