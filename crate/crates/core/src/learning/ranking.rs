//! Ranking-data generation by replaying a labeled stream, and the pairwise
//! linear ranker trained on it.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::svm::{hinge_l1, SolverOptions};
use super::RankingExample;
use crate::error::{Error, Result};
use crate::model::{ClusterRef, ClusteringState, DocRepresentation, Document, Language};
use crate::similarity::{
    cross_features, dense_cosine, dot, mono_features, sparse_cosine, CrossSimilarityModel, SimilarityModel,
    CROSS_FEATURES, DEFAULT_SIGMA_HOURS, MONO_FEATURES,
};

/// Which cluster pool the replay maintains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    /// Clusters formed by the online algorithm itself, using only the first
    /// sparse subvector and `replay_tau`.
    System,
    /// Clusters formed by the gold labels.
    Gold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDataConfig {
    pub pool: PoolMode,
    /// Join threshold on the first-subvector cosine during a system replay.
    pub replay_tau: f64,
    pub max_negatives: usize,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for RankingDataConfig {
    fn default() -> Self {
        RankingDataConfig {
            pool: PoolMode::System,
            replay_tau: 0.3,
            max_negatives: 20,
            mu: 0.0,
            sigma: DEFAULT_SIGMA_HOURS,
        }
    }
}

pub(crate) fn gold_mono(doc: &Document) -> Result<&str> {
    doc.gold_mono_label.as_deref().ok_or_else(|| Error::Unlabeled {
        doc_id: doc.id.clone(),
        kind: "monolingual",
    })
}

fn gold_cross(doc: &Document) -> Result<&str> {
    doc.gold_cross_label.as_deref().ok_or_else(|| Error::Unlabeled {
        doc_id: doc.id.clone(),
        kind: "crosslingual",
    })
}

/// Sorts `(id, score)` by descending score, ties toward the lowest id, and
/// keeps the first `k`.
fn top_k(mut scored: Vec<(u64, f64)>, k: usize) -> Vec<(u64, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Replays the stream and emits one query per document that has at least
/// one correct cluster in the pool. A pool cluster is positive when it holds
/// a document with the query's gold label; negatives are the best-ranked
/// incorrect clusters by first-subvector cosine. Features are the full
/// 12-dimensional document-cluster vector.
pub fn generate_ranking_data(
    stream: &[(Document, DocRepresentation)],
    config: &RankingDataConfig,
) -> Result<Vec<RankingExample>> {
    for (doc, _) in stream {
        gold_mono(doc)?;
    }
    let mut state = ClusteringState::new();
    let mut labels: HashMap<Language, Vec<HashSet<String>>> = HashMap::new();
    let mut gold_home: HashMap<(Language, String), ClusterRef> = HashMap::new();
    let mut out = Vec::new();

    for (doc, rep) in stream {
        doc.validate()?;
        if state.contains_document(&doc.id) {
            return Err(Error::DuplicateDocument(doc.id.clone()));
        }
        let gold = gold_mono(doc)?;
        let clusters = state.clusters(&doc.language);
        let cluster_labels = labels.entry(doc.language.clone()).or_default();

        let phi1: Vec<(u64, f64)> = clusters
            .iter()
            .map(|c| (c.id, sparse_cosine(&rep.mono[0], c.mono_sum(0))))
            .collect();
        let mut positives = Vec::new();
        let mut wrong = Vec::new();
        for (c, &(id, s)) in clusters.iter().zip(&phi1) {
            if cluster_labels[(id - 1) as usize].contains(gold) {
                positives.push(mono_features(rep, c, config.mu, config.sigma).to_vec());
            } else {
                wrong.push((id, s));
            }
        }
        if !positives.is_empty() {
            let negatives = top_k(wrong, config.max_negatives)
                .into_iter()
                .map(|(id, _)| mono_features(rep, &clusters[(id - 1) as usize], config.mu, config.sigma).to_vec())
                .collect();
            out.push(RankingExample {
                query_id: doc.id.clone(),
                positives,
                negatives,
            });
        }

        let target = match config.pool {
            PoolMode::System => top_k(phi1, 1)
                .first()
                .filter(|(_, s)| *s > config.replay_tau)
                .map(|(id, _)| ClusterRef {
                    language: doc.language.clone(),
                    id: *id,
                }),
            PoolMode::Gold => gold_home.get(&(doc.language.clone(), gold.to_string())).cloned(),
        };
        let r = match target {
            Some(r) => {
                state.add_to_cluster(&r, doc, rep);
                r
            }
            None => {
                cluster_labels.push(HashSet::new());
                state.create_cluster(doc, rep)
            }
        };
        cluster_labels[(r.id - 1) as usize].insert(gold.to_string());
        gold_home.entry((doc.language.clone(), gold.to_string())).or_insert(r);
    }
    Ok(out)
}

/// Builds cluster-pair ranking data for the crosslingual model. The pool
/// holds the gold monolingual clusters; after each document the cluster it
/// joined is the query, clusters of other languages with the same gold
/// crosslingual label are positives, and the best-matching others by
/// dense cosine are negatives. Features are the 6-dimensional cluster-pair
/// vector.
pub fn generate_cross_ranking_data(
    stream: &[(Document, DocRepresentation)],
    config: &RankingDataConfig,
) -> Result<Vec<RankingExample>> {
    for (doc, _) in stream {
        gold_mono(doc)?;
        gold_cross(doc)?;
    }
    let mut state = ClusteringState::new();
    let mut gold_home: HashMap<(Language, String), ClusterRef> = HashMap::new();
    let mut cross_label: HashMap<ClusterRef, String> = HashMap::new();
    let mut out = Vec::new();

    for (doc, rep) in stream {
        doc.validate()?;
        if state.contains_document(&doc.id) {
            return Err(Error::DuplicateDocument(doc.id.clone()));
        }
        let key = (doc.language.clone(), gold_mono(doc)?.to_string());
        let r = match gold_home.get(&key) {
            Some(r) => {
                let r = r.clone();
                state.add_to_cluster(&r, doc, rep);
                r
            }
            None => {
                let r = state.create_cluster(doc, rep);
                gold_home.insert(key, r.clone());
                cross_label.insert(r.clone(), gold_cross(doc)?.to_string());
                r
            }
        };
        let query = state.cluster(&r).expect("cluster just updated");
        let label = &cross_label[&r];

        let mut positives = Vec::new();
        let mut wrong = Vec::new();
        for c in state.all_clusters().filter(|c| c.language != doc.language) {
            if &cross_label[&c.reference()] == label {
                positives.push(cross_features(query, c, config.mu, config.sigma).to_vec());
            } else {
                wrong.push((c, dense_cosine(query.cross_sum(0), c.cross_sum(0))));
            }
        }
        if positives.is_empty() {
            continue;
        }
        wrong.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| a.0.language.cmp(&b.0.language))
                .then(a.0.id.cmp(&b.0.id))
        });
        wrong.truncate(config.max_negatives);
        out.push(RankingExample {
            query_id: doc.id.clone(),
            positives,
            negatives: wrong
                .into_iter()
                .map(|(c, _)| cross_features(query, c, config.mu, config.sigma).to_vec())
                .collect(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerConfig {
    /// Candidate regularization constants, chosen by cross-validation.
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            c_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            folds: 5,
            seed: 0,
            max_epochs: 500,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRanker {
    pub weights: Vec<f64>,
    /// Regularization constant used for the final fit.
    pub c: f64,
    /// Mean held-out pairwise accuracy of the chosen constant, when
    /// cross-validation ran.
    pub cv_accuracy: Option<f64>,
}

impl TrainedRanker {
    pub fn mono_model(&self, mu: f64, sigma: f64) -> Result<SimilarityModel> {
        let w: [f64; MONO_FEATURES] = self
            .weights
            .as_slice()
            .try_into()
            .map_err(|_| Error::config(format!("expected {MONO_FEATURES} weights, got {}", self.weights.len())))?;
        let m = SimilarityModel::from_weights(&w, mu, sigma);
        m.validate()?;
        Ok(m)
    }

    pub fn cross_model(&self, mu: f64, sigma: f64) -> Result<CrossSimilarityModel> {
        let w: [f64; CROSS_FEATURES] = self
            .weights
            .as_slice()
            .try_into()
            .map_err(|_| Error::config(format!("expected {CROSS_FEATURES} weights, got {}", self.weights.len())))?;
        let m = CrossSimilarityModel::from_weights(&w, mu, sigma);
        m.validate()?;
        Ok(m)
    }
}

/// Fraction of (positive, negative) pairs ranked strictly correctly by `w`.
/// Returns 1.0 when there are no pairs.
pub fn pairwise_accuracy(weights: &[f64], examples: &[RankingExample]) -> f64 {
    let (mut good, mut total) = (0usize, 0usize);
    for ex in examples {
        let neg: Vec<f64> = ex.negatives.iter().map(|n| dot(weights, n)).collect();
        for p in &ex.positives {
            let sp = dot(weights, p);
            good += neg.iter().filter(|&&sn| sp > sn).count();
            total += neg.len();
        }
    }
    if total == 0 {
        1.0
    } else {
        good as f64 / total as f64
    }
}

/// Drops exact repeats of a query and queries without pairs, and checks
/// that every feature vector has one finite arity.
fn canonical(examples: &[RankingExample]) -> Result<(Vec<RankingExample>, usize)> {
    let mut arity = None;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for ex in examples {
        for f in ex.positives.iter().chain(&ex.negatives) {
            if *arity.get_or_insert(f.len()) != f.len() || f.is_empty() {
                return Err(Error::config(format!("query {} has inconsistent feature arity", ex.query_id)));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("query {} has a non-finite feature", ex.query_id)));
            }
        }
        let fingerprint: (String, Vec<Vec<u64>>, Vec<Vec<u64>>) = (
            ex.query_id.clone(),
            ex.positives.iter().map(|f| f.iter().map(|v| v.to_bits()).collect()).collect(),
            ex.negatives.iter().map(|f| f.iter().map(|v| v.to_bits()).collect()).collect(),
        );
        if ex.pair_count() > 0 && seen.insert(fingerprint) {
            out.push(ex.clone());
        }
    }
    match (out.is_empty(), arity) {
        (false, Some(a)) => Ok((out, a)),
        _ => Err(Error::NoRankablePairs),
    }
}

/// Pairwise hinge-loss fit. Every pair of query `q` costs `c / P_q`, where
/// `P_q` is its pair count, so each query carries the same total weight.
fn fit(examples: &[RankingExample], dim: usize, c: f64, config: &RankerConfig) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut upper = Vec::new();
    for ex in examples {
        let u = c / ex.pair_count() as f64;
        for p in &ex.positives {
            for n in &ex.negatives {
                xs.push(p.iter().zip(n).map(|(a, b)| a - b).collect());
                upper.push(u);
            }
        }
    }
    let opts = SolverOptions {
        max_epochs: config.max_epochs,
        tolerance: config.tolerance,
        seed: config.seed,
    };
    hinge_l1(&xs, &upper, dim, &opts)
}

/// Trains linear ranking weights. The regularization constant is picked from
/// `config.c_grid` by cross-validated pairwise accuracy with folds split by
/// query id (ties toward the smaller constant), then refit on all data.
pub fn train_ranker(examples: &[RankingExample], config: &RankerConfig) -> Result<TrainedRanker> {
    if config.c_grid.is_empty() || config.c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::config("c_grid must hold positive finite values"));
    }
    let (queries, dim) = canonical(examples)?;
    let mut grid = config.c_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut ids: Vec<&str> = queries.iter().map(|q| q.query_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let folds = config.folds.min(ids.len());

    let (c, cv_accuracy) = if grid.len() == 1 || folds < 2 {
        (grid[grid.len() / 2], None)
    } else {
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
        let fold_of: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i % folds)).collect();
        let mut best: Option<(f64, f64)> = None;
        for &c in &grid {
            let mut acc = 0.0;
            for k in 0..folds {
                let (held, train): (Vec<RankingExample>, Vec<RankingExample>) =
                    queries.iter().cloned().partition(|q| fold_of[q.query_id.as_str()] == k);
                let w = fit(&train, dim, c, config);
                acc += pairwise_accuracy(&w, &held);
            }
            acc /= folds as f64;
            if best.is_none_or(|(_, b)| acc > b) {
                best = Some((c, acc));
            }
        }
        let (c, acc) = best.expect("grid is non-empty");
        (c, Some(acc))
    };
    Ok(TrainedRanker {
        weights: fit(&queries, dim, c, config),
        c,
        cv_accuracy,
    })
}
