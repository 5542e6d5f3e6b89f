//! Join-vs-new classifier over the per-feature maxima of the candidate pool.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ranking::gold_mono;
use super::svm::{hinge_l2, SolverOptions};
use crate::clusterer::score_candidates;
use crate::error::{Error, Result};
use crate::model::{ClusterRef, ClusteringState, DocRepresentation, Document, Language};
use crate::similarity::{dot, MonoFeatures, SimilarityModel, MONO_FEATURES};

/// Linear classifier: join iff `weights . maxima + bias > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeModel {
    pub weights: MonoFeatures,
    pub bias: f64,
    /// Set when training saw a single class and produced a constant model.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl MergeModel {
    pub fn decision_value(&self, maxima: &MonoFeatures) -> f64 {
        dot(&self.weights, maxima) + self.bias
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().chain([&self.bias]).any(|v| !v.is_finite()) {
            return Err(Error::config("merge model weights must be finite"));
        }
        Ok(())
    }
}

/// Pool maintained while replaying the training stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergePool {
    /// Documents join their gold cluster.
    Gold,
    /// Documents join the best cluster when its score exceeds `tau`, as the
    /// threshold policy would at run time.
    System { tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeTrainingConfig {
    pub pool: MergePool,
    pub c: f64,
    /// Scale each class's cost by the inverse of its frequency.
    pub balanced: bool,
    pub seed: u64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for MergeTrainingConfig {
    fn default() -> Self {
        MergeTrainingConfig {
            pool: MergePool::Gold,
            c: 10.0,
            balanced: true,
            seed: 0,
            max_epochs: 1000,
            tolerance: 1e-4,
        }
    }
}

/// Replays the stream. For each document arriving while its language
/// already has clusters, emits the per-feature maxima over those clusters
/// with label `true` iff a pool cluster already holds a document of its gold
/// cluster.
pub fn merge_examples(
    stream: &[(Document, DocRepresentation)],
    ranker: &SimilarityModel,
    pool: MergePool,
) -> Result<Vec<(MonoFeatures, bool)>> {
    for (doc, _) in stream {
        gold_mono(doc)?;
    }
    let mut state = ClusteringState::new();
    let mut gold_home: HashMap<(Language, String), ClusterRef> = HashMap::new();
    let mut out = Vec::new();
    for (doc, rep) in stream {
        doc.validate()?;
        if state.contains_document(&doc.id) {
            return Err(Error::DuplicateDocument(doc.id.clone()));
        }
        let key = (doc.language.clone(), gold_mono(doc)?.to_string());
        let home = gold_home.get(&key).cloned();
        let mut target = None;
        if !state.clusters(&doc.language).is_empty() {
            let scores = score_candidates(&state, rep, &doc.language, ranker, false);
            out.push((scores.feature_maxima, home.is_some()));
            target = match pool {
                MergePool::Gold => home,
                MergePool::System { tau } => scores.best().filter(|(_, s)| *s > tau).map(|(id, _)| ClusterRef {
                    language: doc.language.clone(),
                    id,
                }),
            };
        }
        let r = match target {
            Some(r) => {
                state.add_to_cluster(&r, doc, rep);
                r
            }
            None => state.create_cluster(doc, rep),
        };
        gold_home.entry(key).or_insert(r);
    }
    Ok(out)
}

/// Trains the merge classifier on replayed examples with an L2-regularized
/// squared-hinge linear SVM. Single-class data yields a constant model
/// flagged `degenerate`.
pub fn train_merge(
    stream: &[(Document, DocRepresentation)],
    ranker: &SimilarityModel,
    config: &MergeTrainingConfig,
) -> Result<MergeModel> {
    if !(config.c.is_finite() && config.c > 0.0) {
        return Err(Error::config("merge classifier C must be positive"));
    }
    let examples = merge_examples(stream, ranker, config.pool)?;
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    let joins = examples.iter().filter(|(_, y)| *y).count();
    if joins == 0 || joins == examples.len() {
        log::warn!(
            "merge training data has a single class ({}); using a constant model",
            if joins == 0 { "new" } else { "join" }
        );
        return Ok(MergeModel {
            weights: [0.0; MONO_FEATURES],
            bias: if joins == 0 { -1.0 } else { 1.0 },
            degenerate: true,
        });
    }
    let n = examples.len() as f64;
    let (cost_join, cost_new) = if config.balanced {
        (
            config.c * n / (2.0 * joins as f64),
            config.c * n / (2.0 * (examples.len() - joins) as f64),
        )
    } else {
        (config.c, config.c)
    };
    let mut xs = Vec::with_capacity(examples.len());
    let mut ys = Vec::with_capacity(examples.len());
    let mut costs = Vec::with_capacity(examples.len());
    for (f, join) in &examples {
        let mut x = f.to_vec();
        x.push(1.0);
        xs.push(x);
        ys.push(if *join { 1.0 } else { -1.0 });
        costs.push(if *join { cost_join } else { cost_new });
    }
    let opts = SolverOptions {
        max_epochs: config.max_epochs,
        tolerance: config.tolerance,
        seed: config.seed,
    };
    let w = hinge_l2(&xs, &ys, &costs, MONO_FEATURES + 1, &opts);
    let mut weights = [0.0; MONO_FEATURES];
    weights.copy_from_slice(&w[..MONO_FEATURES]);
    let model = MergeModel {
        weights,
        bias: w[MONO_FEATURES],
        degenerate: false,
    };
    model.validate()?;
    Ok(model)
}
