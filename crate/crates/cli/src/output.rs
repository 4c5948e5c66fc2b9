use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use coarse_entropy::{Dist, Rational};

use crate::config::Format;
use crate::CliError;

/// A command result: a JSON document and a plot-ready table drawn from it.
#[derive(Debug, Default)]
pub struct Report {
    pub json: Map<String, Value>,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Set when a classification came back inconclusive.
    pub inconclusive: bool,
}

impl Report {
    pub fn new(json: Map<String, Value>) -> Self {
        Report { json, ..Report::default() }
    }

    pub fn insert<T: Serialize>(&mut self, key: &str, value: T) -> Result<(), CliError> {
        self.json.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Merges the fields of a serializable struct into the top level.
    pub fn extend<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        if let Value::Object(m) = serde_json::to_value(value)? {
            self.json.extend(m);
        }
        Ok(())
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                out.write_all(b"\n")?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.headers)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(cell))?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// CSV text of a JSON value: strings unquoted, null empty, numbers as in the JSON.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn dist(d: &Dist) -> Value {
    serde_json::to_value(d).unwrap_or(Value::Null)
}

/// Decimal companion of a distance.
pub fn dist_decimal(d: &Dist) -> Value {
    match d {
        Dist::Infinite => Value::String("inf".into()),
        other => num(other.to_f64()),
    }
}

pub fn rational(q: &Rational) -> Value {
    Value::String(coarse_entropy::dist::format_rational(q))
}

pub fn rational_decimal(q: &Rational) -> Value {
    num(coarse_entropy::dist::rational_to_f64(q))
}
