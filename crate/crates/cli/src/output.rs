//! Rendering of results as human text, CSV or JSON.

use clap::ValueEnum;
use serde_json::{json, Value};
use symwalk::exactnum::DyadicProb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

/// A flat result: named fields, some of which are exact probabilities.
pub struct Row {
    fields: Vec<(String, Cell)>,
    human: String,
}

enum Cell {
    Text(String),
    Int(i128),
    Bool(bool),
    Prob(DyadicProb),
}

impl Row {
    pub fn new(human: impl Into<String>) -> Self {
        Row {
            fields: Vec::new(),
            human: human.into(),
        }
    }

    pub fn text(mut self, name: &str, v: impl Into<String>) -> Self {
        self.fields.push((name.into(), Cell::Text(v.into())));
        self
    }

    pub fn int(mut self, name: &str, v: impl Into<i128>) -> Self {
        self.fields.push((name.into(), Cell::Int(v.into())));
        self
    }

    pub fn flag(mut self, name: &str, v: bool) -> Self {
        self.fields.push((name.into(), Cell::Bool(v)));
        self
    }

    pub fn prob(mut self, name: &str, p: &DyadicProb) -> Self {
        self.fields.push((name.into(), Cell::Prob(p.clone())));
        self
    }

    fn columns(&self, digits: usize) -> Vec<(String, Value)> {
        let mut out = Vec::new();
        for (name, cell) in &self.fields {
            match cell {
                Cell::Text(s) => out.push((name.clone(), json!(s))),
                Cell::Int(i) => out.push((name.clone(), json!(i.to_string().parse::<serde_json::Number>().ok()))),
                Cell::Bool(b) => out.push((name.clone(), json!(b))),
                Cell::Prob(p) => {
                    out.push((name.clone(), json!(p.to_power_form())));
                    out.push((format!("{name}_decimal"), json!(p.to_decimal_auto(digits))));
                }
            }
        }
        out
    }

    pub fn to_json(&self, digits: usize) -> Value {
        Value::Object(self.columns(digits).into_iter().collect())
    }
}

pub fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Renders rows sharing one set of columns.
pub fn render(rows: &[Row], format: Format, digits: usize) -> String {
    match format {
        Format::Human => rows.iter().map(|r| format!("{}\n", r.human)).collect(),
        Format::Json => {
            let items: Vec<Value> = rows.iter().map(|r| r.to_json(digits)).collect();
            let v = if items.len() == 1 {
                items.into_iter().next().unwrap_or(Value::Null)
            } else {
                Value::Array(items)
            };
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap_or_default())
        }
        Format::Csv => {
            let mut out = String::new();
            if let Some(first) = rows.first() {
                let header: Vec<String> = first.columns(digits).into_iter().map(|(k, _)| k).collect();
                out.push_str(&header.join(","));
                out.push('\n');
            }
            for r in rows {
                let line: Vec<String> = r.columns(digits).iter().map(|(_, v)| csv_field(v)).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            out
        }
    }
}

/// `p/q (decimal)` for human output.
pub fn human_prob(p: &DyadicProb, digits: usize) -> String {
    format!("{p} ({})", p.to_decimal_auto(digits))
}
