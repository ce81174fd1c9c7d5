//! Tables and their CSV / JSON serialization.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(&'static str),
}

impl Cell {
    /// Shortest representation that parses back to the same double.
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => (*s).to_owned(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String((*s).to_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, metadata: Value) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_owned(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("metadata".into(), metadata);
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }
}

pub fn emit(table: &Table, metadata: Value, format: Format, out: Option<&Path>) -> io::Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => table.write_csv(&mut sink).map_err(io::Error::other)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &table.to_json(metadata))?;
            writeln!(sink)?;
        }
    }
    sink.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let values = [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 5e-324];
        let mut t = Table::new(&["v", "tag"]);
        for v in values {
            t.push(vec![Cell::Num(v), Cell::Text("a,b")]);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        for (rec, v) in r.records().zip(values) {
            let rec = rec.unwrap();
            let back: f64 = rec[0].parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
            assert_eq!(&rec[1], "a,b");
        }
    }

    #[test]
    fn json_has_rows_and_metadata() {
        let mut t = Table::new(&["x", "m"]);
        t.push(vec![Cell::Num(0.5), Cell::Text("series")]);
        let doc = t.to_json(serde_json::json!({"k": 1}));
        assert_eq!(doc["rows"][0]["x"], 0.5);
        assert_eq!(doc["rows"][0]["m"], "series");
        assert_eq!(doc["metadata"]["k"], 1);
    }
}
