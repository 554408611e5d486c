//! Versioned reports (schema `cohatlas-report/1`) and their CSV tables.
//!
//! Only `body` is meant to be compared between runs; wall-clock time lives in
//! `meta`. Every float, in JSON and CSV alike, is written as `{:.16e}`.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::config::Kind;
use crate::formats::fmt_f64;

pub const REPORT_SCHEMA: &str = "cohatlas-report/1";

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

pub fn complex(z: cohatlas_core::C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn cell(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        String::new()
    }
}

/// Rewrites every non-integer number in `v` in the report float format.
pub fn normalize_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => {
            *v = n.as_f64().map(num).unwrap_or(Value::Null);
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_numbers),
        Value::Object(map) => map.values_mut().for_each(normalize_numbers),
        _ => {}
    }
}

pub fn csv_header(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::ClassifyMap => &[
            "name",
            "classification",
            "witness",
            "canonical",
            "anti_canonical",
            "canonicity_defect",
            "origin_preserving",
        ],
        Kind::VacuumTest => &["name", "classification", "vacuum_residual", "overlap", "verdict"],
        Kind::CoherenceTest => &["name", "probe", "residual", "bound", "within_bound", "primed_defect"],
        Kind::ResolveUnity => &["name", "family", "nodes", "max_residual", "vacuum_entry", "converged"],
        Kind::AtlasCheck => {
            &["name", "structure", "coherence", "from", "to", "classification", "vacuum_residual", "overlap", "agrees"]
        }
        Kind::DualityFilter => &["name", "category", "class", "canonicity_defect", "anti_canonical"],
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub kind: Kind,
    /// Deterministic part: config echo, items and kind-specific summary.
    pub body: Value,
    pub rows: Vec<Vec<String>>,
    pub duration_seconds: f64,
}

impl Report {
    pub fn new(
        kind: Kind,
        config: Value,
        items: Vec<Value>,
        extra: Map<String, Value>,
        rows: Vec<Vec<String>>,
    ) -> Self {
        let mut body = Map::new();
        body.insert("kind".into(), Value::String(kind.as_str().into()));
        body.insert("config".into(), config);
        body.insert("items".into(), Value::Array(items));
        body.extend(extra);
        let mut body = Value::Object(body);
        normalize_numbers(&mut body);
        Self { kind, body, rows, duration_seconds: 0.0 }
    }

    pub fn comparable_body(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema".into(), Value::String(REPORT_SCHEMA.into()));
        root.insert("body".into(), self.body.clone());
        let mut meta = Map::new();
        meta.insert("duration_seconds".into(), num(self.duration_seconds));
        root.insert("meta".into(), Value::Object(meta));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(csv_header(self.kind))?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> std::io::Result<()> {
    let bytes = match format {
        Format::Json => report.to_json().into_bytes(),
        Format::Csv => report.to_csv().map_err(std::io::Error::other)?,
    };
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let mut v: Value = serde_json::from_str(r#"{"a": 6.0, "b": 3, "c": [1e-8]}"#).unwrap();
        normalize_numbers(&mut v);
        assert_eq!(v.to_string(), r#"{"a":6.0000000000000000e+0,"b":3,"c":[1.0000000000000000e-8]}"#);
    }

    #[test]
    fn json_numbers_round_trip() {
        for x in [0.1 + 0.2, -1.0 / 3.0, 1e-300, 2.5e10] {
            let parsed: f64 = num(x).to_string().parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn empty_report_gives_header_only_csv() {
        let r = Report::new(Kind::VacuumTest, Value::Null, vec![], Map::new(), vec![]);
        let csv = String::from_utf8(r.to_csv().unwrap()).unwrap();
        assert_eq!(csv, "name,classification,vacuum_residual,overlap,verdict\n");
    }
}
