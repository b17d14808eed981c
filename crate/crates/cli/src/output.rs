//! Record assembly and rendering.
//!
//! Computed values are rounded to 15 significant digits in JSON and 9 in CSV.
//! Echoed inputs are written unrounded so a record parses back to the exact
//! parameters it was produced from.

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// An ordered flat record. Keys become JSON fields or CSV columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Map<String, Value>);

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn rounded(v: Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round_sig(x, digits)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(|x| rounded(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, rounded(x, digits))).collect()),
        other => other,
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn input(mut self, key: &str, x: f64) -> Self {
        self.0.insert(key.to_string(), number(x));
        self
    }

    pub fn input_int(mut self, key: &str, x: i64) -> Self {
        self.0.insert(key.to_string(), Value::from(x));
        self
    }

    pub fn input_uint(mut self, key: &str, x: u64) -> Self {
        self.0.insert(key.to_string(), Value::from(x));
        self
    }

    pub fn flag(mut self, key: &str, b: bool) -> Self {
        self.0.insert(key.to_string(), Value::from(b));
        self
    }

    pub fn text(mut self, key: &str, s: &str) -> Self {
        self.0.insert(key.to_string(), Value::from(s));
        self
    }

    pub fn value(mut self, key: &str, x: f64) -> Self {
        self.0.insert(key.to_string(), rounded(number(x), 15));
        self
    }

    pub fn maybe(self, key: &str, x: Option<f64>) -> Self {
        match x {
            Some(x) => self.value(key, x),
            None => self.null(key),
        }
    }

    pub fn null(mut self, key: &str) -> Self {
        self.0.insert(key.to_string(), Value::Null);
        self
    }

    pub fn list(mut self, key: &str, xs: impl IntoIterator<Item = f64>) -> Self {
        let arr = xs.into_iter().map(|x| rounded(number(x), 15)).collect();
        self.0.insert(key.to_string(), Value::Array(arr));
        self
    }

    pub fn counts(mut self, key: &str, xs: &[u64]) -> Self {
        self.0.insert(key.to_string(), Value::Array(xs.iter().map(|&x| Value::from(x)).collect()));
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::Number(n) => round_sig(n.as_f64().unwrap_or(f64::NAN), 9).to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => v.to_string(),
    }
}

/// Render records as a JSON document or as a CSV table whose columns follow
/// the first record's key order.
pub fn render(records: &[Record], format: Format, as_array: bool) -> String {
    match format {
        Format::Json => {
            let value = if as_array || records.len() != 1 {
                Value::Array(records.iter().cloned().map(Record::into_value).collect())
            } else {
                records[0].clone().into_value()
            };
            let mut s = serde_json::to_string_pretty(&value).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            if let Some(first) = records.first() {
                let header: Vec<&String> = first.keys().collect();
                w.write_record(&header).expect("in-memory write");
                for r in records {
                    let row: Vec<String> = header.iter().map(|k| r.0.get(*k).map(csv_cell).unwrap_or_default()).collect();
                    w.write_record(&row).expect("in-memory write");
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 cells")
        }
    }
}
