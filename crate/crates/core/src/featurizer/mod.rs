//! Document featurization: tokenization, IDF tables, crosslingual word
//! embeddings, and the 9 sparse + 3 dense subvector representation.

mod annotator;
mod embeddings;
mod idf;
mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use annotator::{Annotation, Annotator, ExternalCommandAnnotator, PlainAnnotator};
pub use embeddings::EmbeddingTable;
pub use idf::{smoothed_idf, IdfTable};
pub use tokenize::tokenize;

use crate::error::Result;
use crate::model::{
    dense_index, sparse_index, DenseVector, DocRepresentation, Document, FeatureClass, Section,
    SparseVector, TermId,
};

/// Term-frequency scheme applied before IDF weighting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfScheme {
    /// Raw term count.
    #[default]
    Raw,
    /// `1 + ln(count)`.
    Log,
}

impl TfScheme {
    fn weight(self, count: u32) -> f64 {
        match self {
            TfScheme::Raw => f64::from(count),
            TfScheme::Log => 1.0 + f64::from(count).ln(),
        }
    }
}

type Counts = BTreeMap<String, u32>;

#[derive(Default)]
struct SectionCounts {
    tokens: Counts,
    lemmas: Counts,
    entities: Counts,
}

impl SectionCounts {
    fn from_annotation(ann: Annotation) -> Self {
        let mut c = SectionCounts::default();
        for (list, dst) in [
            (ann.tokens, &mut c.tokens),
            (ann.lemmas, &mut c.lemmas),
            (ann.entities, &mut c.entities),
        ] {
            for term in list {
                if !term.is_empty() {
                    *dst.entry(term).or_insert(0) += 1;
                }
            }
        }
        c
    }

    fn merged(a: &SectionCounts, b: &SectionCounts) -> Self {
        let add = |x: &Counts, y: &Counts| {
            let mut out = x.clone();
            for (t, c) in y {
                *out.entry(t.clone()).or_insert(0) += c;
            }
            out
        };
        SectionCounts {
            tokens: add(&a.tokens, &b.tokens),
            lemmas: add(&a.lemmas, &b.lemmas),
            entities: add(&a.entities, &b.entities),
        }
    }

    fn class(&self, class: FeatureClass) -> &Counts {
        match class {
            FeatureClass::Token => &self.tokens,
            FeatureClass::Lemma => &self.lemmas,
            FeatureClass::Entity => &self.entities,
        }
    }
}

/// Builds [`DocRepresentation`]s from shared read-only tables.
#[derive(Clone, Copy)]
pub struct Featurizer<'a> {
    idf: &'a IdfTable,
    embeddings: &'a EmbeddingTable,
    annotator: &'a dyn Annotator,
    tf: TfScheme,
}

impl<'a> Featurizer<'a> {
    pub fn new(idf: &'a IdfTable, embeddings: &'a EmbeddingTable, annotator: &'a dyn Annotator) -> Self {
        Featurizer {
            idf,
            embeddings,
            annotator,
            tf: TfScheme::default(),
        }
    }

    pub fn with_tf(mut self, tf: TfScheme) -> Self {
        self.tf = tf;
        self
    }

    pub fn embedding_dim(&self) -> usize {
        self.embeddings.dim()
    }

    /// Every non-zero subvector is L2-normalized; empty sections give zero
    /// subvectors and out-of-vocabulary tokens are skipped in the dense ones.
    pub fn represent(&self, doc: &Document) -> Result<DocRepresentation> {
        let lang = &doc.language;
        let title = SectionCounts::from_annotation(self.annotator.annotate(lang, &doc.title)?);
        let body = SectionCounts::from_annotation(self.annotator.annotate(lang, &doc.body)?);
        let both = SectionCounts::merged(&title, &body);
        let sections = [(Section::Both, &both), (Section::Title, &title), (Section::Body, &body)];

        let mut rep = DocRepresentation::empty(doc.timestamp, self.embeddings.dim());
        for class in FeatureClass::ALL {
            for (section, counts) in sections {
                let weights = counts.class(class).iter().map(|(term, &c)| {
                    let w = self.tf.weight(c) * self.idf.idf(lang, class, term);
                    (TermId::new(class, term), w)
                });
                rep.mono[sparse_index(class, section)] = SparseVector::from_weights(weights).normalized();
            }
        }
        for (section, counts) in sections {
            let mut v = DenseVector::zeros(self.embeddings.dim());
            for (token, &c) in &counts.tokens {
                if let Some(e) = self.embeddings.get(token) {
                    let t = self.tf.weight(c) * self.idf.idf(lang, FeatureClass::Token, token);
                    v.add_scaled(e, t);
                }
            }
            rep.cross[dense_index(section)] = v.normalized();
        }
        Ok(rep)
    }
}

/// Convenience wrapper around [`Featurizer::represent`] with the default
/// TF scheme.
pub fn represent(
    doc: &Document,
    idf: &IdfTable,
    embeddings: &EmbeddingTable,
    annotator: &dyn Annotator,
) -> Result<DocRepresentation> {
    Featurizer::new(idf, embeddings, annotator).represent(doc)
}
