use std::collections::HashMap;
use std::fmt::Write;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::model::DenseVector;

/// Word vectors sharing one crosslingual space. Words are case-folded on
/// load and on lookup.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, DenseVector>,
}

impl EmbeddingTable {
    /// Table with no words; every dense subvector built from it is empty.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut table = EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        };
        for (i, (word, v)) in pairs.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::EmbeddingDimension {
                    expected: dim,
                    found: v.len(),
                    line: i + 1,
                });
            }
            table
                .vectors
                .entry(word.as_ref().to_lowercase())
                .or_insert(DenseVector(v));
        }
        Ok(table)
    }

    /// Parses the text format `word v1 .. vm`, one word per line, with an
    /// optional leading `count dim` header line. The first occurrence of a
    /// word (after case folding) wins.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = EmbeddingTable::default();
        let mut dim: Option<usize> = None;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Malformed {
                line: line_no,
                message: format!("read error: {e}"),
            })?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if line_no == 1 && rest.len() == 1 {
                if let (Ok(_), Ok(d)) = (word.parse::<u64>(), rest[0].parse::<usize>()) {
                    dim = Some(d);
                    continue;
                }
            }
            let values = rest
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| Error::Malformed {
                    line: line_no,
                    message: "non-numeric embedding value".into(),
                })?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Malformed {
                    line: line_no,
                    message: "non-finite embedding value".into(),
                });
            }
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(Error::EmbeddingDimension {
                    expected,
                    found: values.len(),
                    line: line_no,
                });
            }
            table
                .vectors
                .entry(word.to_lowercase())
                .or_insert(DenseVector(values));
        }
        table.dim = dim.unwrap_or(0);
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&DenseVector> {
        match self.vectors.get(word) {
            Some(v) => Some(v),
            None => self.vectors.get(&word.to_lowercase()),
        }
    }

    /// Text form with a `count dim` header, words sorted.
    pub fn to_text(&self) -> String {
        let mut words: Vec<(&String, &DenseVector)> = self.vectors.iter().collect();
        words.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = format!("{} {}\n", words.len(), self.dim);
        for (w, v) in words {
            out.push_str(w);
            for x in &v.0 {
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
        out
    }
}
