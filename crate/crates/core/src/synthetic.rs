//! Seeded synthetic news streams with known story labels, for tests,
//! benchmarks and demos.
//!
//! Each story owns a vocabulary per language and a direction in a toy
//! embedding space shared by all languages, so documents of one story are
//! similar within a language through shared words and across languages
//! through their embeddings.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::featurizer::{tokenize, Annotation, Annotator, EmbeddingTable, Featurizer, IdfTable};
use crate::model::{DocRepresentation, Document, Language};

/// Order in which documents are emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// Cycle through stories, emitting one document per language for each.
    RoundRobin,
    /// Draw a story from the currently active window at every step.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoryStreamConfig {
    pub languages: Vec<String>,
    pub stories: usize,
    /// Total documents emitted (all languages together).
    pub docs: usize,
    /// Number of stories active at any time; the window slides from the
    /// first to the last story over the stream. Ignored by round robin.
    pub concurrent: usize,
    pub order: Order,
    /// Size of each story's vocabulary window per language.
    pub story_vocab: usize,
    /// Story words per document body.
    pub doc_words: usize,
    /// Story words per title.
    pub title_words: usize,
    /// Background vocabulary shared by every story of a language.
    pub shared_vocab: usize,
    /// Background words per document body.
    pub shared_per_doc: usize,
    /// Titles use background words only, so title features carry no signal.
    pub noisy_titles: bool,
    /// The story vocabulary window advances by this many words per
    /// document of the story.
    pub drift: f64,
    /// Number of surface variants per word (`word_k`); 0 or 1 disables.
    /// [`SuffixAnnotator`] maps every variant to the same lemma.
    pub inflections: usize,
    /// Capitalized names per story, one of which appears in each body.
    pub entities_per_story: usize,
    pub hours_per_doc: f64,
    /// The gap between consecutive documents grows linearly from
    /// `hours_per_doc` to `hours_per_doc * (1 + rate_drift)` over the stream.
    pub rate_drift: f64,
    pub embedding_dim: usize,
    /// Magnitude of per-word noise around the story direction.
    pub embedding_noise: f64,
    pub seed: u64,
}

impl Default for StoryStreamConfig {
    fn default() -> Self {
        StoryStreamConfig {
            languages: vec!["en".into()],
            stories: 10,
            docs: 200,
            concurrent: 4,
            order: Order::Random,
            story_vocab: 12,
            doc_words: 8,
            title_words: 3,
            shared_vocab: 40,
            shared_per_doc: 4,
            noisy_titles: false,
            drift: 0.0,
            inflections: 0,
            entities_per_story: 0,
            hours_per_doc: 1.0,
            rate_drift: 0.0,
            embedding_dim: 16,
            embedding_noise: 0.2,
            seed: 0,
        }
    }
}

impl StoryStreamConfig {
    /// Three stories in English, German and Spanish with disjoint
    /// vocabularies and no background words, emitted round robin.
    pub fn separable_trilingual(docs_per_story_language: usize, seed: u64) -> Self {
        StoryStreamConfig {
            languages: vec!["en".into(), "de".into(), "es".into()],
            stories: 3,
            docs: 9 * docs_per_story_language,
            concurrent: 3,
            order: Order::RoundRobin,
            shared_vocab: 0,
            shared_per_doc: 0,
            seed,
            ..Default::default()
        }
    }
}

/// Documents plus the toy embedding table covering their words.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub docs: Vec<Document>,
    pub embeddings: EmbeddingTable,
}

impl SyntheticCorpus {
    /// Builds an IDF table from the corpus itself.
    pub fn idf(&self, annotator: &dyn Annotator) -> Result<IdfTable> {
        let mut table = IdfTable::new();
        let mut langs: Vec<&Language> = self.docs.iter().map(|d| &d.language).collect();
        langs.sort();
        langs.dedup();
        for l in langs {
            table.merge(IdfTable::build(&self.docs, l, annotator)?);
        }
        Ok(table)
    }

    /// Featurizes every document with an IDF table built from the corpus.
    pub fn represent(&self, annotator: &dyn Annotator) -> Result<Vec<(Document, DocRepresentation)>> {
        let idf = self.idf(annotator)?;
        let f = Featurizer::new(&idf, &self.embeddings, annotator);
        self.docs.iter().map(|d| Ok((d.clone(), f.represent(d)?))).collect()
    }
}

/// Lemma = token up to the first `_`; entities = words written with an
/// initial capital, lower-cased.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixAnnotator;

impl Annotator for SuffixAnnotator {
    fn annotate(&self, _language: &Language, text: &str) -> Result<Annotation> {
        let tokens = tokenize(text);
        let lemmas = tokens
            .iter()
            .map(|t| t.split('_').next().unwrap_or(t).to_string())
            .collect();
        let entities = text
            .split_whitespace()
            .filter(|w| w.chars().next().is_some_and(char::is_uppercase))
            .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Ok(Annotation {
            tokens,
            lemmas,
            entities,
        })
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Generates a labeled stream. Gold monolingual labels are `s{story}`
/// (scoped per language by the evaluator), and gold crosslingual labels are
/// the same story names.
pub fn story_stream(cfg: &StoryStreamConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let languages: Vec<Language> = cfg
        .languages
        .iter()
        .map(|l| Language::new(l).expect("non-empty language code"))
        .collect();
    let stories = cfg.stories.max(1);
    let directions: Vec<Vec<f64>> = (0..stories).map(|_| random_unit(&mut rng, cfg.embedding_dim)).collect();
    let mut embeddings: Vec<(String, Vec<f64>)> = Vec::new();
    let mut story_docs = vec![0usize; stories * languages.len()];

    let mut embed = |word: String, dir: Option<&Vec<f64>>, rng: &mut ChaCha8Rng| {
        let noise = random_unit(rng, cfg.embedding_dim);
        let v = match dir {
            Some(d) => d.iter().zip(&noise).map(|(a, b)| a + cfg.embedding_noise * b).collect(),
            None => noise,
        };
        embeddings.push((word, v));
    };
    // background words have random directions
    for l in &languages {
        for j in 0..cfg.shared_vocab {
            embed(format!("g{l}{j}"), None, &mut rng);
        }
    }
    let mut embedded_upto = vec![0usize; stories * languages.len()];

    let variant = |w: String, rng: &mut ChaCha8Rng| {
        if cfg.inflections > 1 {
            format!("{w}_{}", rng.gen_range(0..cfg.inflections))
        } else {
            w
        }
    };

    let mut docs = Vec::with_capacity(cfg.docs);
    let mut clock = 0.0;
    for i in 0..cfg.docs {
        if i > 0 {
            let progress = i as f64 / (cfg.docs - 1).max(1) as f64;
            clock += cfg.hours_per_doc * (1.0 + cfg.rate_drift * progress);
        }
        let (story, li) = match cfg.order {
            Order::RoundRobin => ((i / languages.len()) % stories, i % languages.len()),
            Order::Random => {
                let window = cfg.concurrent.clamp(1, stories);
                let start = if cfg.docs > 1 {
                    (i * (stories - window)) / (cfg.docs - 1)
                } else {
                    0
                };
                (start + rng.gen_range(0..window), rng.gen_range(0..languages.len()))
            }
        };
        let lang = &languages[li];
        let slot = story * languages.len() + li;
        let offset = (story_docs[slot] as f64 * cfg.drift).floor() as usize;
        story_docs[slot] += 1;
        let window_end = offset + cfg.story_vocab;
        while embedded_upto[slot] < window_end {
            let w = format!("w{lang}{story}x{}", embedded_upto[slot]);
            for k in 0..cfg.inflections.max(1) {
                let name = if cfg.inflections > 1 { format!("{w}_{k}") } else { w.clone() };
                embed(name, Some(&directions[story]), &mut rng);
            }
            embedded_upto[slot] += 1;
        }
        let story_word = |rng: &mut ChaCha8Rng| variant(format!("w{lang}{story}x{}", offset + rng.gen_range(0..cfg.story_vocab)), rng);
        let shared_word = |rng: &mut ChaCha8Rng| format!("g{lang}{}", rng.gen_range(0..cfg.shared_vocab.max(1)));

        let title: Vec<String> = (0..cfg.title_words)
            .map(|_| {
                if cfg.noisy_titles && cfg.shared_vocab > 0 {
                    shared_word(&mut rng)
                } else {
                    story_word(&mut rng)
                }
            })
            .collect();
        let mut body: Vec<String> = (0..cfg.doc_words).map(|_| story_word(&mut rng)).collect();
        if cfg.shared_vocab > 0 {
            body.extend((0..cfg.shared_per_doc).map(|_| shared_word(&mut rng)));
        }
        if cfg.entities_per_story > 0 {
            body.push(format!("Name{story}n{}", rng.gen_range(0..cfg.entities_per_story)));
        }
        body.shuffle(&mut rng);

        let label = format!("s{story}");
        docs.push(
            Document::new(
                &format!("{lang}-{i}"),
                lang.clone(),
                &title.join(" "),
                &body.join(" "),
                clock,
            )
            .with_gold(&label, Some(&label)),
        );
    }
    for s in 0..stories {
        for n in 0..cfg.entities_per_story {
            embed(format!("name{s}n{n}"), Some(&directions[s]), &mut rng);
        }
    }
    SyntheticCorpus {
        docs,
        embeddings: EmbeddingTable::from_pairs(cfg.embedding_dim, embeddings).expect("consistent dimensions"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic_for_seed() {
        let cfg = StoryStreamConfig::default();
        assert_eq!(story_stream(&cfg).docs, story_stream(&cfg).docs);
        let other = StoryStreamConfig { seed: 1, ..cfg.clone() };
        assert_ne!(story_stream(&cfg).docs, story_stream(&other).docs);
    }

    #[test]
    fn separable_vocabularies_are_disjoint() {
        let c = story_stream(&StoryStreamConfig::separable_trilingual(4, 3));
        assert_eq!(c.docs.len(), 36);
        let mut owner = std::collections::HashMap::new();
        for d in &c.docs {
            let key = (d.language.clone(), d.gold_mono_label.clone().unwrap());
            for w in tokenize(&format!("{} {}", d.title, d.body)) {
                assert_eq!(owner.entry(w).or_insert_with(|| key.clone()), &key);
            }
        }
        // each round emits one document per language for one story
        assert_eq!(c.docs[0].language.as_str(), "en");
        assert_eq!(c.docs[1].language.as_str(), "de");
        assert_eq!(c.docs[3].gold_mono_label.as_deref(), Some("s1"));
    }

    #[test]
    fn every_token_is_embedded() {
        let cfg = StoryStreamConfig {
            drift: 0.5,
            inflections: 3,
            entities_per_story: 2,
            ..Default::default()
        };
        let c = story_stream(&cfg);
        for d in &c.docs {
            for w in tokenize(&format!("{} {}", d.title, d.body)) {
                assert!(c.embeddings.get(&w).is_some(), "{w}");
            }
        }
    }

    #[test]
    fn suffix_annotator() {
        let a = SuffixAnnotator
            .annotate(&Language::new("en").unwrap(), "wen1x2_0 Name3n1 wen1x2_1.")
            .unwrap();
        assert_eq!(a.tokens, vec!["wen1x2_0", "name3n1", "wen1x2_1"]);
        assert_eq!(a.lemmas, vec!["wen1x2", "name3n1", "wen1x2"]);
        assert_eq!(a.entities, vec!["name3n1"]);
    }

    #[test]
    fn random_window_slides() {
        let cfg = StoryStreamConfig {
            stories: 10,
            concurrent: 2,
            docs: 100,
            ..Default::default()
        };
        let c = story_stream(&cfg);
        let early: HashSet<_> = c.docs[..10].iter().map(|d| d.gold_mono_label.clone()).collect();
        let late: HashSet<_> = c.docs[90..].iter().map(|d| d.gold_mono_label.clone()).collect();
        assert!(early.is_disjoint(&late));
    }
}
