//! Weighted-cosine similarity between documents and clusters (monolingual)
//! and between clusters (crosslingual), plus Gaussian timestamp features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ClusterRef, ClusteringState, CrosslingualCluster, DenseVector, DocRepresentation, Language,
    MonolingualCluster, SparseSum, SparseVector, NUM_DENSE, NUM_SPARSE,
};

/// Width of the monolingual feature vector: 9 cosines + 3 timestamp features.
pub const MONO_FEATURES: usize = NUM_SPARSE + 3;
/// Width of the crosslingual feature vector: 3 cosines + 3 timestamp features.
pub const CROSS_FEATURES: usize = NUM_DENSE + 3;

/// Default Gaussian width in hours.
pub const DEFAULT_SIGMA_HOURS: f64 = 72.0;

pub type MonoFeatures = [f64; MONO_FEATURES];
pub type CrossFeatures = [f64; CROSS_FEATURES];

/// Weights for document-to-cluster similarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityModel {
    pub q0: [f64; NUM_SPARSE],
    pub q1: [f64; 3],
    pub mu: f64,
    pub sigma: f64,
}

impl Default for SimilarityModel {
    /// All weights 1, `mu = 0`, `sigma = 72` hours.
    fn default() -> Self {
        SimilarityModel {
            q0: [1.0; NUM_SPARSE],
            q1: [1.0; 3],
            mu: 0.0,
            sigma: DEFAULT_SIGMA_HOURS,
        }
    }
}

impl SimilarityModel {
    pub fn from_weights(w: &MonoFeatures, mu: f64, sigma: f64) -> Self {
        let mut q0 = [0.0; NUM_SPARSE];
        q0.copy_from_slice(&w[..NUM_SPARSE]);
        let mut q1 = [0.0; 3];
        q1.copy_from_slice(&w[NUM_SPARSE..]);
        SimilarityModel { q0, q1, mu, sigma }
    }

    pub fn weights(&self) -> MonoFeatures {
        let mut w = [0.0; MONO_FEATURES];
        w[..NUM_SPARSE].copy_from_slice(&self.q0);
        w[NUM_SPARSE..].copy_from_slice(&self.q1);
        w
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(&self.weights(), self.mu, self.sigma)
    }

    pub fn score(&self, features: &MonoFeatures) -> f64 {
        dot(&self.weights(), features)
    }
}

/// Weights for cluster-to-cluster similarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSimilarityModel {
    pub q0: [f64; NUM_DENSE],
    pub q1: [f64; 3],
    pub mu: f64,
    pub sigma: f64,
}

impl Default for CrossSimilarityModel {
    fn default() -> Self {
        CrossSimilarityModel {
            q0: [1.0; NUM_DENSE],
            q1: [1.0; 3],
            mu: 0.0,
            sigma: DEFAULT_SIGMA_HOURS,
        }
    }
}

impl CrossSimilarityModel {
    pub fn from_weights(w: &CrossFeatures, mu: f64, sigma: f64) -> Self {
        let mut q0 = [0.0; NUM_DENSE];
        q0.copy_from_slice(&w[..NUM_DENSE]);
        let mut q1 = [0.0; 3];
        q1.copy_from_slice(&w[NUM_DENSE..]);
        CrossSimilarityModel { q0, q1, mu, sigma }
    }

    pub fn weights(&self) -> CrossFeatures {
        let mut w = [0.0; CROSS_FEATURES];
        w[..NUM_DENSE].copy_from_slice(&self.q0);
        w[NUM_DENSE..].copy_from_slice(&self.q1);
        w
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(&self.weights(), self.mu, self.sigma)
    }

    pub fn score(&self, features: &CrossFeatures) -> f64 {
        dot(&self.weights(), features)
    }
}

fn validate_common(weights: &[f64], mu: f64, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::config(format!("sigma must be positive, got {sigma}")));
    }
    if !mu.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::config("model weights must be finite"));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `exp(-(t - mu)^2 / (2 sigma^2))`.
pub fn time_feature(delta_hours: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::config(format!("sigma must be positive, got {sigma}")));
    }
    Ok(gaussian(delta_hours, mu, sigma))
}

#[inline]
fn gaussian(t: f64, mu: f64, sigma: f64) -> f64 {
    let d = t - mu;
    (-(d * d) / (2.0 * sigma * sigma)).exp()
}

/// Timestamp features of a document against a cluster's newest, average and
/// oldest member timestamps.
pub fn gamma(doc_timestamp: f64, cluster: &MonolingualCluster, mu: f64, sigma: f64) -> [f64; 3] {
    [
        gaussian(doc_timestamp - cluster.ts_newest(), mu, sigma),
        gaussian(doc_timestamp - cluster.ts_average(), mu, sigma),
        gaussian(doc_timestamp - cluster.ts_oldest(), mu, sigma),
    ]
}

/// Cosine between a document subvector and a centroid sum; 0 if either is
/// the zero vector. Cosine is scale-free, so the sum stands in for the mean.
pub fn sparse_cosine(doc: &SparseVector, sum: &SparseSum) -> f64 {
    let dn = doc.norm();
    let cn = sum.norm();
    if dn == 0.0 || cn == 0.0 {
        return 0.0;
    }
    sum.dot(doc) / (dn * cn)
}

pub fn sparse_cosine_vectors(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

pub fn dense_cosine(a: &DenseVector, b: &DenseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

/// Unweighted document-to-cluster features: 9 sparse cosines then the three
/// timestamp features.
pub fn mono_features(rep: &DocRepresentation, cluster: &MonolingualCluster, mu: f64, sigma: f64) -> MonoFeatures {
    let mut f = [0.0; MONO_FEATURES];
    for (i, slot) in f.iter_mut().take(NUM_SPARSE).enumerate() {
        *slot = sparse_cosine(&rep.mono[i], cluster.mono_sum(i));
    }
    f[NUM_SPARSE..].copy_from_slice(&gamma(rep.timestamp, cluster, mu, sigma));
    f
}

/// Document-to-cluster similarity: weighted sparse cosines plus weighted
/// timestamp features.
pub fn gamma0(
    rep: &DocRepresentation,
    language: &Language,
    cluster: &MonolingualCluster,
    model: &SimilarityModel,
) -> Result<f64> {
    if language != &cluster.language {
        return Err(Error::LanguageMismatch {
            doc: language.clone(),
            cluster: cluster.language.clone(),
        });
    }
    Ok(model.score(&mono_features(rep, cluster, model.mu, model.sigma)))
}

/// Unweighted cluster-to-cluster features: dense centroid cosines, then
/// Gaussians of the newest-newest, average-average and oldest-oldest
/// timestamp gaps. Symmetric in its arguments when `mu = 0`.
pub fn cross_features(c1: &MonolingualCluster, c2: &MonolingualCluster, mu: f64, sigma: f64) -> CrossFeatures {
    let mut f = [0.0; CROSS_FEATURES];
    for (i, slot) in f.iter_mut().take(NUM_DENSE).enumerate() {
        *slot = dense_cosine(c1.cross_sum(i), c2.cross_sum(i));
    }
    f[NUM_DENSE] = gaussian(c1.ts_newest() - c2.ts_newest(), mu, sigma);
    f[NUM_DENSE + 1] = gaussian(c1.ts_average() - c2.ts_average(), mu, sigma);
    f[NUM_DENSE + 2] = gaussian(c1.ts_oldest() - c2.ts_oldest(), mu, sigma);
    f
}

pub fn gamma1_pair(c1: &MonolingualCluster, c2: &MonolingualCluster, model: &CrossSimilarityModel) -> f64 {
    model.score(&cross_features(c1, c2, model.mu, model.sigma))
}

/// How a monolingual cluster is scored against a crosslingual cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossMode {
    /// Sum of pair scores over all members.
    Sum,
    /// Score only against the pivot-language member.
    ///
    /// Crosslingual clusters without a pivot member are scored by summing
    /// when the incoming cluster is itself in the pivot language, or when
    /// `fallback` is set; otherwise they are not candidates.
    Pivot { language: Language, fallback: bool },
}

impl CrossMode {
    pub fn pivot(language: Language) -> Self {
        CrossMode::Pivot {
            language,
            fallback: false,
        }
    }
}

/// Scores `c` against a set of monolingual clusters standing for (part of) a
/// crosslingual cluster. `None` means "not a candidate": the set is empty, or
/// pivot mode has no pivot member to compare against.
pub fn gamma1_to_members(
    c: &MonolingualCluster,
    members: &[&MonolingualCluster],
    model: &CrossSimilarityModel,
    mode: &CrossMode,
) -> Option<f64> {
    if members.is_empty() {
        return None;
    }
    let sum = || members.iter().map(|m| gamma1_pair(c, m, model)).sum::<f64>();
    match mode {
        CrossMode::Sum => Some(sum()),
        CrossMode::Pivot { language, fallback } => {
            if let Some(p) = members.iter().find(|m| &m.language == language) {
                Some(gamma1_pair(c, p, model))
            } else if &c.language == language || *fallback {
                Some(sum())
            } else {
                None
            }
        }
    }
}

/// Similarity between a monolingual cluster and a crosslingual cluster in
/// `state`. Returns `None` when `a` offers nothing to compare against.
pub fn gamma1_to_crosslingual(
    state: &ClusteringState,
    c: &MonolingualCluster,
    a: &CrosslingualCluster,
    model: &CrossSimilarityModel,
    mode: &CrossMode,
) -> Option<f64> {
    let members: Vec<&MonolingualCluster> = a
        .member_refs()
        .filter_map(|r: ClusterRef| state.cluster(&r))
        .collect();
    gamma1_to_members(c, &members, model, mode)
}
