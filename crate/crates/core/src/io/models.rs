//! Versioned JSON model files.
//!
//! Every file is an object with `format_version`, `kind`, an optional
//! `fingerprint` of the run that produced it, and the payload fields.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::clusterer::Models;
use crate::error::{Error, Result};
use crate::learning::MergeModel;
use crate::model::Language;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub format_version: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(flatten)]
    pub payload: T,
}

/// Similarity weights plus the threshold tuned for them, if any.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankerFile {
    pub models: Models,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tau_per_language: BTreeMap<Language, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeFile {
    #[serde(default)]
    pub default: Option<MergeModel>,
    #[serde(default)]
    pub per_language: BTreeMap<Language, MergeModel>,
}

pub const RANKER_KIND: &str = "ranker";
pub const MERGE_KIND: &str = "merge-model";

pub fn to_json<T: Serialize>(kind: &str, payload: &T, fingerprint: Option<&str>) -> String {
    #[derive(Serialize)]
    struct Out<'a, T> {
        format_version: u32,
        kind: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        fingerprint: Option<&'a str>,
        #[serde(flatten)]
        payload: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Out {
        format_version: FORMAT_VERSION,
        kind,
        fingerprint,
        payload,
    })
    .expect("model payloads serialize");
    s.push('\n');
    s
}

/// Parses a model file, checking kind and version before the payload.
pub fn from_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<Versioned<T>> {
    let malformed = |e: serde_json::Error| Error::Malformed {
        line: e.line(),
        message: e.to_string(),
    };
    #[derive(Deserialize)]
    struct Header {
        format_version: u32,
        kind: String,
    }
    let header: Header = serde_json::from_str(text).map_err(malformed)?;
    if header.kind != kind {
        return Err(Error::Malformed {
            line: 1,
            message: format!("expected a {kind} file, found {}", header.kind),
        });
    }
    if header.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            what: kind.to_string(),
            found: header.format_version,
            expected: FORMAT_VERSION,
        });
    }
    serde_json::from_str(text).map_err(malformed)
}

pub fn parse_ranker(text: &str) -> Result<Versioned<RankerFile>> {
    let v: Versioned<RankerFile> = from_json(RANKER_KIND, text)?;
    v.payload.models.validate()?;
    Ok(v)
}

pub fn parse_merge(text: &str) -> Result<Versioned<MergeFile>> {
    let v: Versioned<MergeFile> = from_json(MERGE_KIND, text)?;
    for m in v.payload.default.iter().chain(v.payload.per_language.values()) {
        m.validate()?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::SimilarityModel;

    #[test]
    fn ranker_round_trip() {
        let mut models = Models::default();
        models.mono.insert(
            Language::new("en").unwrap(),
            SimilarityModel::from_weights(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.0 / 3.0], 0.0, 72.0),
        );
        let file = RankerFile {
            models,
            tau: Some(2.5),
            tau_per_language: BTreeMap::new(),
        };
        let text = to_json(RANKER_KIND, &file, Some("abc"));
        let back = parse_ranker(&text).unwrap();
        assert_eq!(back.payload, file);
        assert_eq!(back.fingerprint.as_deref(), Some("abc"));
    }

    #[test]
    fn merge_round_trip() {
        let file = MergeFile {
            default: Some(MergeModel {
                weights: [0.5; 12],
                bias: -1.25,
                degenerate: false,
            }),
            per_language: BTreeMap::new(),
        };
        let back = parse_merge(&to_json(MERGE_KIND, &file, None)).unwrap();
        assert_eq!(back.payload, file);
    }

    #[test]
    fn version_and_kind_checked() {
        let text = to_json(RANKER_KIND, &RankerFile::default(), None);
        assert!(matches!(parse_merge(&text), Err(Error::Malformed { .. })));
        let future = text.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(parse_ranker(&future), Err(Error::FormatVersion { found: 9, .. })));
        assert!(parse_ranker("{}").is_err());
    }

    #[test]
    fn invalid_sigma_rejected() {
        let mut file = RankerFile::default();
        file.models.mono_default.sigma = 0.0;
        assert!(parse_ranker(&to_json(RANKER_KIND, &file, None)).is_err());
    }
}
