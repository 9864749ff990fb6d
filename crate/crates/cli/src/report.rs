//! Report rows with per-invariant outcome flags, emitted as CSV or JSON.

use serde_json::{Map, Number, Value as Json};

/// Outcome of one asserted invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Flag(Outcome),
}

impl Value {
    /// CSV cell: floats carry 17 significant digits.
    pub fn to_cell(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{x:.16e}"),
            Value::Text(s) => s.clone(),
            Value::Flag(o) => o.as_str().to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::Float(x) => Number::from_f64(*x).map_or_else(|| Json::from(x.to_string()), Json::Number),
            Value::Text(s) => Json::from(s.clone()),
            Value::Flag(o) => Json::from(o.as_str()),
        }
    }
}

/// Ordered key/value pairs of one sweep point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row(pub Vec<(&'static str, Value)>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn int(mut self, key: &'static str, v: usize) -> Self {
        self.0.push((key, Value::Int(v as i64)));
        self
    }

    pub fn float(mut self, key: &'static str, v: f64) -> Self {
        self.0.push((key, Value::Float(v)));
        self
    }

    pub fn text(mut self, key: &'static str, v: impl Into<String>) -> Self {
        self.0.push((key, Value::Text(v.into())));
        self
    }

    pub fn flag(mut self, key: &'static str, v: Outcome) -> Self {
        self.0.push((key, Value::Flag(v)));
        self
    }

    pub fn check(self, key: &'static str, ok: bool) -> Self {
        self.flag(key, Outcome::from_bool(ok))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn failures(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0
            .iter()
            .filter(|(_, v)| *v == Value::Flag(Outcome::Fail))
            .map(|(k, _)| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub subcommand: &'static str,
    pub metadata: Vec<(&'static str, String)>,
    pub rows: Vec<Row>,
}

impl Report {
    /// `(row index, invariant name)` for every failed flag.
    pub fn failures(&self) -> Vec<(usize, &'static str)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.failures().map(move |k| (i, k)))
            .collect()
    }

    pub fn keys(&self) -> Vec<&'static str> {
        self.rows
            .first()
            .map(|r| r.0.iter().map(|(k, _)| *k).collect())
            .unwrap_or_default()
    }

    pub fn to_csv(&self) -> String {
        if self.rows.is_empty() {
            return String::new();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.keys()).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.0.iter().map(|(_, v)| v.to_cell()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        meta.insert("version".into(), Json::from(env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.metadata {
            meta.insert((*k).into(), Json::from(v.clone()));
        }
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| Json::Object(r.0.iter().map(|(k, v)| ((*k).to_string(), v.to_json())).collect()))
            .collect();
        let mut top = Map::new();
        top.insert("metadata".into(), Json::Object(meta));
        top.insert("rows".into(), Json::Array(rows));
        let mut text = serde_json::to_string_pretty(&Json::Object(top)).expect("report serializes");
        text.push('\n');
        text
    }
}
