use std::io::Write;
use std::process::{Command, Stdio};

use serde::Deserialize;

use super::tokenize;
use crate::error::{Error, Result};
use crate::model::Language;

/// Linguistic annotation of one text section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct Annotation {
    pub tokens: Vec<String>,
    #[serde(default)]
    pub lemmas: Vec<String>,
    #[serde(default)]
    pub entities: Vec<String>,
}

/// Turns text into tokens, lemmas and entity mentions. Implementations must
/// be deterministic.
pub trait Annotator: Send + Sync {
    fn annotate(&self, language: &Language, text: &str) -> Result<Annotation>;
}

/// Fallback annotator: lemma = token, no entities.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainAnnotator;

impl Annotator for PlainAnnotator {
    fn annotate(&self, _language: &Language, text: &str) -> Result<Annotation> {
        let tokens = tokenize(text);
        Ok(Annotation {
            lemmas: tokens.clone(),
            tokens,
            entities: Vec::new(),
        })
    }
}

/// Runs an external program once per section.
///
/// The program receives the language code as its last argument and the
/// section text on stdin, and must print a JSON object
/// `{"tokens": [..], "lemmas": [..], "entities": [..]}` on stdout. Missing
/// `tokens` fall back to the built-in tokenizer; tokens are lower-cased.
#[derive(Debug, Clone)]
pub struct ExternalCommandAnnotator {
    program: String,
    args: Vec<String>,
}

impl ExternalCommandAnnotator {
    /// `command_line` is split on whitespace into program and arguments.
    pub fn new(command_line: &str) -> Result<Self> {
        let mut parts = command_line.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::config("empty annotator command"))?;
        Ok(ExternalCommandAnnotator {
            program,
            args: parts.collect(),
        })
    }
}

#[derive(Deserialize)]
struct RawAnnotation {
    #[serde(default)]
    tokens: Option<Vec<String>>,
    #[serde(default)]
    lemmas: Vec<String>,
    #[serde(default)]
    entities: Vec<String>,
}

impl Annotator for ExternalCommandAnnotator {
    fn annotate(&self, language: &Language, text: &str) -> Result<Annotation> {
        if text.trim().is_empty() {
            return Ok(Annotation::default());
        }
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(language.as_str())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Annotator(format!("spawn {}: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin
                .write_all(text.as_bytes())
                .map_err(|e| Error::Annotator(format!("write: {e}")))?;
        }
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Annotator(format!("wait: {e}")))?;
        if !out.status.success() {
            return Err(Error::Annotator(format!("{} exited with {}", self.program, out.status)));
        }
        let raw: RawAnnotation = serde_json::from_slice(&out.stdout)
            .map_err(|e| Error::Annotator(format!("bad output: {e}")))?;
        let tokens = match raw.tokens {
            Some(t) => t.iter().map(|s| s.to_lowercase()).collect(),
            None => tokenize(text),
        };
        let lemmas = if raw.lemmas.is_empty() {
            tokens.clone()
        } else {
            raw.lemmas.iter().map(|s| s.to_lowercase()).collect()
        };
        Ok(Annotation {
            tokens,
            lemmas,
            entities: raw.entities,
        })
    }
}
