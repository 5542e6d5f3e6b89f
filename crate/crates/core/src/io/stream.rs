//! Line-delimited JSON document stream.
//!
//! One record per line with fields `id`, `language`, `title`, `body`,
//! `timestamp` and optional `gold_mono_label` / `gold_cross_label`. The
//! timestamp is hours since the Unix epoch, either as a number or as an
//! ISO-8601 string.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{Document, Language};

/// Default tolerated backwards jump in timestamps, in hours.
pub const DEFAULT_SLACK_HOURS: f64 = 72.0;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTimestamp {
    Hours(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    language: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    timestamp: RawTimestamp,
    #[serde(default)]
    gold_mono_label: Option<String>,
    #[serde(default)]
    gold_cross_label: Option<String>,
}

/// Converts an ISO-8601 / RFC 3339 date or date-time to hours since the
/// Unix epoch. Strings without an offset are read as UTC. Plain numbers are
/// accepted as hours.
pub fn parse_timestamp(text: &str) -> Result<f64> {
    let text = text.trim();
    let secs = if let Ok(h) = text.parse::<f64>() {
        return finite_hours(h, text);
    } else if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9
    } else if let Some(dt) = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
    {
        let utc = dt.and_utc();
        utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9
    } else if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc().timestamp() as f64
    } else {
        return Err(Error::config(format!("unrecognized timestamp {text:?}")));
    };
    finite_hours(secs / 3600.0, text)
}

fn finite_hours(h: f64, text: &str) -> Result<f64> {
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::config(format!("timestamp {text:?} is not finite")))
    }
}

/// Parses one stream record. `line` is used in error messages.
pub fn parse_document(text: &str, line: usize) -> Result<Document> {
    let malformed = |message: String| Error::Malformed { line, message };
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let timestamp = match raw.timestamp {
        RawTimestamp::Hours(h) => h,
        RawTimestamp::Text(s) => parse_timestamp(&s).map_err(|e| malformed(e.to_string()))?,
    };
    let language = Language::new(&raw.language).map_err(|e| malformed(e.to_string()))?;
    let doc = Document {
        id: raw.id,
        language,
        title: raw.title,
        body: raw.body,
        timestamp,
        gold_mono_label: raw.gold_mono_label,
        gold_cross_label: raw.gold_cross_label,
    };
    doc.validate().map_err(|e| malformed(e.to_string()))?;
    Ok(doc)
}

/// Serializes a document as one JSON line (without the newline). The
/// timestamp is always written as a number of hours.
pub fn serialize_document(doc: &Document) -> String {
    serde_json::to_string(doc).expect("documents always serialize")
}

/// Iterator over stream records. Blank lines are skipped. With a slack set,
/// a timestamp more than `slack` hours behind the latest one seen is an
/// error.
pub struct StreamReader<R> {
    input: R,
    line: usize,
    slack: Option<f64>,
    latest: f64,
    buf: String,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(input: R) -> Self {
        StreamReader {
            input,
            line: 0,
            slack: Some(DEFAULT_SLACK_HOURS),
            latest: f64::NEG_INFINITY,
            buf: String::new(),
        }
    }

    pub fn with_slack(mut self, slack: Option<f64>) -> Self {
        self.slack = slack;
        self
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(Error::Malformed {
                        line: self.line,
                        message: e.to_string(),
                    }))
                }
            }
            if self.buf.trim().is_empty() {
                continue;
            }
            let doc = match parse_document(self.buf.trim_end_matches(['\n', '\r']), self.line) {
                Ok(d) => d,
                Err(e) => return Some(Err(e)),
            };
            if let Some(slack) = self.slack {
                if self.latest - doc.timestamp > slack {
                    return Some(Err(Error::TimestampRegression {
                        line: self.line,
                        timestamp: doc.timestamp,
                        behind: self.latest - doc.timestamp,
                        slack,
                    }));
                }
            }
            self.latest = self.latest.max(doc.timestamp);
            return Some(Ok(doc));
        }
    }
}

/// Reads a whole stream, rejecting duplicate ids.
pub fn read_stream<R: BufRead>(input: R, slack: Option<f64>) -> Result<Vec<Document>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for doc in StreamReader::new(input).with_slack(slack) {
        let doc = doc?;
        if seen.insert(doc.id.clone(), ()).is_some() {
            return Err(Error::DuplicateDocument(doc.id));
        }
        out.push(doc);
    }
    Ok(out)
}

pub fn write_stream<W: Write>(docs: &[Document], mut out: W) -> std::io::Result<()> {
    for d in docs {
        writeln!(out, "{}", serialize_document(d))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn numeric_and_iso_timestamps() {
        let a = parse_document(r#"{"id":"a","language":"EN","title":"t","body":"b","timestamp":12.5}"#, 1).unwrap();
        assert_eq!(a.timestamp, 12.5);
        assert_eq!(a.language.as_str(), "en");
        let b = parse_document(
            r#"{"id":"b","language":"de","title":"t","timestamp":"1970-01-02T06:00:00Z"}"#,
            1,
        )
        .unwrap();
        assert_eq!(b.timestamp, 30.0);
        assert_eq!(parse_timestamp("1970-01-01T03:00:00+02:00").unwrap(), 1.0);
        assert_eq!(parse_timestamp("1970-01-03").unwrap(), 48.0);
        assert_eq!(parse_timestamp("1970-01-01 01:30:00").unwrap(), 1.5);
        assert!(parse_timestamp("yesterday").is_err());
    }

    #[test]
    fn malformed_reports_line() {
        let text = "\n{\"id\":\"a\",\"language\":\"en\",\"title\":\"t\",\"timestamp\":0}\n{oops}\n";
        let err = read_stream(text.as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err:?}");
        let missing_ts = r#"{"id":"a","language":"en","title":"t"}"#;
        assert!(parse_document(missing_ts, 1).is_err());
        let empty = r#"{"id":"a","language":"en","title":"","body":" ","timestamp":0}"#;
        assert!(parse_document(empty, 1).is_err());
    }

    #[test]
    fn regression_beyond_slack() {
        let line = |id: &str, ts: f64| format!("{{\"id\":\"{id}\",\"language\":\"en\",\"title\":\"t\",\"timestamp\":{ts}}}\n");
        let ok = format!("{}{}", line("a", 100.0), line("b", 28.0));
        assert_eq!(read_stream(ok.as_bytes(), Some(72.0)).unwrap().len(), 2);
        let bad = format!("{}{}", line("a", 100.0), line("b", 27.0));
        assert!(matches!(
            read_stream(bad.as_bytes(), Some(72.0)),
            Err(Error::TimestampRegression { line: 2, .. })
        ));
        assert!(read_stream(bad.as_bytes(), None).is_ok());
        let dup = format!("{}{}", line("a", 1.0), line("a", 2.0));
        assert!(matches!(read_stream(dup.as_bytes(), None), Err(Error::DuplicateDocument(_))));
    }

    fn arb_doc() -> impl Strategy<Value = Document> {
        (
            "[a-z0-9_-]{1,12}",
            "[a-z]{2}",
            "\\PC{0,30}",
            "\\PC{1,60}",
            -1e6f64..1e6,
            proptest::option::of("[a-z0-9]{1,6}"),
            proptest::option::of("[a-z0-9]{1,6}"),
        )
            .prop_map(|(id, l, title, body, ts, m, c)| Document {
                id,
                language: Language::new(&l).unwrap(),
                title,
                body: format!("x{body}"),
                timestamp: ts,
                gold_mono_label: m,
                gold_cross_label: c,
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(doc in arb_doc()) {
            let line = serialize_document(&doc);
            let back = parse_document(&line, 1).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(serialize_document(&back), line);
        }
    }
}
