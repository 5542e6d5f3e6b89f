//! Conversion of third-party article dumps into the stream format. Field
//! names are configurable; numeric ids and labels are stringified.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::stream::{parse_timestamp, serialize_document};
use crate::error::{Error, Result};
use crate::model::{Document, Language};

/// Source field name for each stream field. A missing optional field
/// (title, body, labels) is left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub id: String,
    pub language: String,
    pub title: String,
    pub body: String,
    pub timestamp: String,
    pub gold_mono: String,
    pub gold_cross: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            id: "id".into(),
            language: "lang".into(),
            title: "title".into(),
            body: "text".into(),
            timestamp: "date".into(),
            gold_mono: "cluster".into(),
            gold_cross: "crosslingual_cluster".into(),
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Converts one source record (a JSON object).
pub fn convert_record(text: &str, line: usize, map: &FieldMap) -> Result<Document> {
    let malformed = |message: String| Error::Malformed { line, message };
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| malformed("record is not an object".into()))?;
    let field = |name: &str| obj.get(name).filter(|v| !v.is_null());
    let required = |name: &str| {
        field(name)
            .and_then(scalar)
            .ok_or_else(|| malformed(format!("missing or non-scalar field {name:?}")))
    };
    let optional = |name: &str| field(name).and_then(scalar);

    let timestamp = match field(&map.timestamp) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| malformed("timestamp out of range".into()))?,
        Some(Value::String(s)) => parse_timestamp(s).map_err(|e| malformed(e.to_string()))?,
        _ => return Err(malformed(format!("missing timestamp field {:?}", map.timestamp))),
    };
    let doc = Document {
        id: required(&map.id)?,
        language: Language::new(&required(&map.language)?).map_err(|e| malformed(e.to_string()))?,
        title: optional(&map.title).unwrap_or_default(),
        body: optional(&map.body).unwrap_or_default(),
        timestamp,
        gold_mono_label: optional(&map.gold_mono),
        gold_cross_label: optional(&map.gold_cross),
    };
    doc.validate().map_err(|e| malformed(e.to_string()))?;
    Ok(doc)
}

/// Converts a line-delimited source and sorts the result by timestamp
/// (stable, so ties keep source order). Returns the document count.
pub fn convert<R: BufRead, W: Write>(input: R, mut out: W, map: &FieldMap) -> Result<usize> {
    let mut docs = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Malformed {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(convert_record(&line, n + 1, map)?);
    }
    docs.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    for d in &docs {
        writeln!(out, "{}", serialize_document(d)).map_err(|e| Error::io("<output>", e))?;
    }
    Ok(docs.len())
}
