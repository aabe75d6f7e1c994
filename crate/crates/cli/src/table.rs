use std::io::Write;

use anyhow::Result;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Int(Vec<u64>),
    /// `None` renders as an empty CSV field and JSON `null`.
    Float(Vec<Option<f64>>),
    Bool(Vec<bool>),
}

impl Values {
    fn len(&self) -> usize {
        match self {
            Values::Int(v) => v.len(),
            Values::Float(v) => v.len(),
            Values::Bool(v) => v.len(),
        }
    }

    fn csv_field(&self, row: usize) -> String {
        match self {
            Values::Int(v) => v[row].to_string(),
            Values::Float(v) => v[row].map(format_float).unwrap_or_default(),
            Values::Bool(v) => v[row].to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Values::Int(v) => v.iter().copied().map(Value::from).collect(),
            Values::Float(v) => v
                .iter()
                .map(|x| x.map_or(Value::Null, json_number))
                .collect(),
            Values::Bool(v) => v.iter().copied().map(Value::from).collect(),
        }
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Shortest round-trip representation; non-finite values become `null`.
pub fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Columnar result of one command plus its diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Table {
    columns: Vec<(String, Values)>,
    pub diagnostics: Map<String, Value>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, values: Values) {
        if let Some((_, first)) = self.columns.first() {
            assert_eq!(
                first.len(),
                values.len(),
                "column {name} has the wrong length"
            );
        }
        self.columns.push((name.to_owned(), values));
    }

    pub fn floats(&mut self, name: &str, values: impl IntoIterator<Item = f64>) {
        self.push(name, Values::Float(values.into_iter().map(Some).collect()));
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_owned(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<&Values> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.column_names())?;
        for row in 0..self.rows() {
            out.write_record(self.columns.iter().map(|(_, v)| v.csv_field(row)))?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{"meta": {...meta, "diagnostics": ...}, "data": {column: [...]}}`
    pub fn to_json(&self, mut meta: Map<String, Value>) -> Value {
        meta.insert(
            "diagnostics".into(),
            Value::Object(self.diagnostics.clone()),
        );
        let data: Map<String, Value> = self
            .columns
            .iter()
            .map(|(name, v)| (name.clone(), v.json()))
            .collect();
        let mut root = Map::new();
        root.insert("meta".into(), Value::Object(meta));
        root.insert("data".into(), Value::Object(data));
        Value::Object(root)
    }
}
