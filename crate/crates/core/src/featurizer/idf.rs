use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use super::annotator::Annotator;
use crate::error::{Error, Result};
use crate::model::{Document, FeatureClass, Language};

const HEADER: &str = "#polyclust-idf v1";

/// Smoothed inverse document frequency: `ln((1 + n) / (1 + df)) + 1`.
///
/// Always positive; a term never seen gets the maximum `ln(1 + n) + 1`.
pub fn smoothed_idf(doc_count: u64, df: u64) -> f64 {
    ((1.0 + doc_count as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone, Default, PartialEq)]
struct LanguageIdf {
    doc_count: u64,
    terms: HashMap<FeatureClass, HashMap<String, f64>>,
}

impl LanguageIdf {
    fn unseen(&self) -> f64 {
        smoothed_idf(self.doc_count, 0)
    }
}

/// Per-language IDF weights with separate namespaces per feature class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdfTable {
    languages: BTreeMap<Language, LanguageIdf>,
}

impl IdfTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts document frequencies over every corpus document written in
    /// `language`. Terms are taken from title and body together.
    pub fn build<'a, I>(corpus: I, language: &Language, annotator: &dyn Annotator) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut n = 0u64;
        let mut df: HashMap<FeatureClass, HashMap<String, u64>> = HashMap::new();
        for doc in corpus.into_iter().filter(|d| &d.language == language) {
            n += 1;
            let mut seen: BTreeSet<(FeatureClass, String)> = BTreeSet::new();
            for text in [&doc.title, &doc.body] {
                let ann = annotator.annotate(language, text)?;
                seen.extend(ann.tokens.into_iter().map(|t| (FeatureClass::Token, t)));
                seen.extend(ann.lemmas.into_iter().map(|t| (FeatureClass::Lemma, t)));
                seen.extend(ann.entities.into_iter().map(|t| (FeatureClass::Entity, t)));
            }
            for (class, term) in seen {
                *df.entry(class).or_default().entry(term).or_insert(0) += 1;
            }
        }
        if n == 0 {
            return Err(Error::EmptyCorpus(language.clone()));
        }
        let terms = df
            .into_iter()
            .map(|(class, counts)| {
                let weights = counts
                    .into_iter()
                    .map(|(t, c)| (t, smoothed_idf(n, c)))
                    .collect();
                (class, weights)
            })
            .collect();
        let mut table = IdfTable::new();
        table
            .languages
            .insert(language.clone(), LanguageIdf { doc_count: n, terms });
        Ok(table)
    }

    /// Adds every language of `other`, replacing languages already present.
    pub fn merge(&mut self, other: IdfTable) {
        self.languages.extend(other.languages);
    }

    pub fn languages(&self) -> impl Iterator<Item = &Language> {
        self.languages.keys()
    }

    pub fn doc_count(&self, language: &Language) -> Option<u64> {
        self.languages.get(language).map(|l| l.doc_count)
    }

    pub fn term_count(&self, language: &Language) -> usize {
        self.languages
            .get(language)
            .map(|l| l.terms.values().map(HashMap::len).sum())
            .unwrap_or(0)
    }

    /// IDF of a term. Unknown terms get the unseen-term maximum; a language
    /// absent from the table weighs every term 1.0.
    pub fn idf(&self, language: &Language, class: FeatureClass, term: &str) -> f64 {
        match self.languages.get(language) {
            None => 1.0,
            Some(l) => l
                .terms
                .get(&class)
                .and_then(|m| m.get(term))
                .copied()
                .unwrap_or_else(|| l.unseen()),
        }
    }

    /// Tab-separated text form, sorted so output is byte-stable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for (lang, l) in &self.languages {
            let _ = writeln!(out, "@doc_count\t{lang}\t{}", l.doc_count);
        }
        for (lang, l) in &self.languages {
            for class in FeatureClass::ALL {
                let Some(terms) = l.terms.get(&class) else { continue };
                let sorted: BTreeMap<&String, &f64> = terms.iter().collect();
                for (term, idf) in sorted {
                    let _ = writeln!(out, "{lang}\t{}\t{}\t{idf:?}", class.name(), escape(term));
                }
            }
        }
        out
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = IdfTable::new();
        let mut header_seen = false;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| malformed(line_no, &format!("read error: {e}")))?;
            if !header_seen {
                if line.trim_end() != HEADER {
                    return Err(malformed(line_no, "missing idf table header"));
                }
                header_seen = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0] == "@doc_count" {
                if fields.len() != 3 {
                    return Err(malformed(line_no, "doc_count record needs 3 fields"));
                }
                let lang = Language::new(fields[1]).map_err(|_| malformed(line_no, "bad language"))?;
                let n: u64 = fields[2]
                    .parse()
                    .map_err(|_| malformed(line_no, "bad doc count"))?;
                table.languages.entry(lang).or_default().doc_count = n;
                continue;
            }
            if fields.len() != 4 {
                return Err(malformed(line_no, "term record needs 4 fields"));
            }
            let lang = Language::new(fields[0]).map_err(|_| malformed(line_no, "bad language"))?;
            let class = FeatureClass::parse(fields[1])
                .ok_or_else(|| malformed(line_no, "unknown feature class"))?;
            let term = unescape(fields[2]).ok_or_else(|| malformed(line_no, "bad escape"))?;
            let idf: f64 = fields[3]
                .parse()
                .map_err(|_| malformed(line_no, "bad idf value"))?;
            if !(idf.is_finite() && idf > 0.0) {
                return Err(malformed(line_no, "idf must be finite and positive"));
            }
            table
                .languages
                .entry(lang)
                .or_default()
                .terms
                .entry(class)
                .or_default()
                .insert(term, idf);
        }
        if !header_seen {
            return Err(malformed(1, "missing idf table header"));
        }
        Ok(table)
    }
}

fn malformed(line: usize, message: &str) -> Error {
    Error::Malformed {
        line,
        message: message.to_string(),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            't' => out.push('\t'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}
