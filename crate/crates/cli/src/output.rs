use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows of preformatted cells under a header.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Table { header: header.iter().map(ToString::to_string).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: impl Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| object(self.header.iter().zip(r))).collect();
                write_json(&Value::Array(rows), out)
            }
        }
    }

    /// To `path`, or standard output when absent.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> io::Result<()> {
        match path {
            Some(p) => self.write(format, BufWriter::new(File::create(p)?)),
            None => self.write(format, io::stdout().lock()),
        }
    }
}

/// Ordered `key=value` pairs, printed on one line or as a JSON object.
#[derive(Clone, Debug, Default)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    pub fn new() -> Self {
        Report(Vec::new())
    }

    pub fn add(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" "),
            Format::Json => object(self.0.iter().map(|(k, v)| (k, v))).to_string(),
        }
    }
}

/// Numbers and booleans become typed JSON values; blanks become null.
fn cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    match s {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(u) = s.parse::<u64>() {
        return Value::from(u);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => Value::String(s.to_string()),
    }
}

fn object<'a>(pairs: impl IntoIterator<Item = (&'a String, &'a String)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.clone(), cell(v))).collect::<Map<_, _>>())
}

fn write_json(v: &Value, mut out: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)
}
